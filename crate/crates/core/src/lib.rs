//! Spatio-temporal Poisson intensity estimation.

pub mod geometry;
pub mod space;
pub mod time;
pub mod aggregation;
pub mod seed;
pub mod lp;
pub mod optimizer;
pub mod noreg;
pub mod covariate;
pub mod crossval;
pub mod simulation;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/space.md")]
    mod space {}
    #[doc = include_str!("../../../book/src/time.md")]
    mod time {}
    #[doc = include_str!("../../../book/src/aggregation.md")]
    mod aggregation {}
    #[doc = include_str!("../../../book/src/noreg.md")]
    mod noreg {}
    #[doc = include_str!("../../../book/src/covariates.md")]
    mod covariates {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/crossval.md")]
    mod crossval {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
