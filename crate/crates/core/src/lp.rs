//! Lower bound from a bundle of affine minorants.
//!
//! Solves `min θ` subject to `θ ≥ f_i + g_iᵀ(y − x_i)` for every cut and
//! `lo ≤ y ≤ hi`, with a bounded-variable primal simplex using Bland's rule.
//! Rows are `θ − g_iᵀy − s_i = c_i` with slacks `s_i ≥ 0`; `θ` is free and
//! stays basic. The basis has one column per cut, so the dense inverse is
//! small even when `y` is long.

/// One affine minorant `f + gᵀ(y − x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub x: Vec<f64>,
    pub f: f64,
    pub g: Vec<f64>,
}

impl Cut {
    fn offset(&self) -> f64 {
        self.f - dot(&self.g, &self.x)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimum over the box of a single minorant: each coordinate snaps to the end
/// opposite its gradient sign.
pub fn single_cut_bound(cut: &Cut, lo: &[f64], hi: &[f64]) -> f64 {
    let mut v = cut.f;
    for j in 0..cut.g.len() {
        let g = cut.g[j];
        let y = if g > 0.0 { lo[j] } else { hi[j] };
        v += g * (y - cut.x[j]);
    }
    v
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Var {
    Y(usize),
    Theta,
    S(usize),
}

/// Minimum over `[lo, hi]` of the maximum of the cuts.
///
/// Falls back to the best single-cut bound, which is always valid, if the
/// simplex hits its iteration cap.
pub fn max_affine_min(cuts: &[Cut], lo: &[f64], hi: &[f64]) -> f64 {
    assert!(!cuts.is_empty());
    let fallback = cuts.iter().map(|c| single_cut_bound(c, lo, hi)).fold(f64::NEG_INFINITY, f64::max);
    if cuts.len() == 1 {
        return fallback;
    }
    solve(cuts, lo, hi).map_or(fallback, |v| v.max(fallback))
}

fn solve(cuts: &[Cut], lo: &[f64], hi: &[f64]) -> Option<f64> {
    let m = cuts.len();
    let n = lo.len();
    let c: Vec<f64> = cuts.iter().map(Cut::offset).collect();
    let scale = cuts
        .iter()
        .flat_map(|k| k.g.iter())
        .fold(1.0f64, |a, &g| a.max(g.abs()));
    let tol = 1e-11 * scale;

    // y starts at the bound minimizing the first cut
    let mut y: Vec<f64> = (0..n).map(|j| if cuts[0].g[j] > 0.0 { lo[j] } else { hi[j] }).collect();
    let mut y_at_hi: Vec<bool> = (0..n).map(|j| cuts[0].g[j] <= 0.0).collect();
    let aff: Vec<f64> = (0..m).map(|i| c[i] + dot(&cuts[i].g, &y)).collect();
    let r0 = (0..m).max_by(|&a, &b| aff[a].total_cmp(&aff[b])).unwrap();

    // column of a variable in the constraint matrix
    let column = |v: Var| -> Vec<f64> {
        match v {
            Var::Y(j) => (0..m).map(|i| -cuts[i].g[j]).collect(),
            Var::Theta => vec![1.0; m],
            Var::S(k) => (0..m).map(|i| if i == k { -1.0 } else { 0.0 }).collect(),
        }
    };
    let mut basis: Vec<Var> = (0..m).map(|i| if i == r0 { Var::Theta } else { Var::S(i) }).collect();
    let mut in_basis_y = vec![usize::MAX; n];
    let mut binv = vec![vec![0.0; m]; m];
    {
        // B = [theta column in row r0's slot, -e_i elsewhere]; invert directly
        for i in 0..m {
            if i == r0 {
                binv[r0][r0] = 1.0;
            } else {
                binv[i][i] = -1.0;
                binv[i][r0] = 1.0;
            }
        }
    }
    let mut xb: Vec<f64> = (0..m)
        .map(|i| if i == r0 { aff[r0] } else { aff[r0] - aff[i] })
        .collect();

    let max_iter = 50 * (n + m) + 1000;
    for _ in 0..max_iter {
        // duals: pi = c_B B^-1, only theta has cost
        let rt = basis.iter().position(|&v| v == Var::Theta)?;
        let pi = &binv[rt];
        // entering variable, smallest index with improving reduced cost
        let mut enter: Option<(Var, f64)> = None;
        for j in 0..n {
            if in_basis_y[j] != usize::MAX || lo[j] == hi[j] {
                continue;
            }
            let d: f64 = -(0..m).map(|i| pi[i] * -cuts[i].g[j]).sum::<f64>();
            if (!y_at_hi[j] && d < -tol) || (y_at_hi[j] && d > tol) {
                enter = Some((Var::Y(j), if y_at_hi[j] { -1.0 } else { 1.0 }));
                break;
            }
        }
        if enter.is_none() {
            for k in 0..m {
                if basis.contains(&Var::S(k)) {
                    continue;
                }
                // reduced cost of s_k is pi_k
                if pi[k] < -tol {
                    enter = Some((Var::S(k), 1.0));
                    break;
                }
            }
        }
        let Some((ev, dir)) = enter else {
            return Some(xb[rt]);
        };
        let a = column(ev);
        let w: Vec<f64> = (0..m).map(|i| dot(&binv[i], &a)).collect();
        // x_B changes by -dir * t * w
        let mut step = match ev {
            Var::Y(j) => hi[j] - lo[j],
            _ => f64::INFINITY,
        };
        let mut leave: Option<(usize, bool)> = None;
        for i in 0..m {
            let delta = -dir * w[i];
            if delta.abs() <= 1e-14 {
                continue;
            }
            let (lb, ub) = match basis[i] {
                Var::Theta => continue,
                Var::S(_) => (0.0, f64::INFINITY),
                Var::Y(j) => (lo[j], hi[j]),
            };
            let (room, to_upper) = if delta < 0.0 { ((xb[i] - lb) / -delta, false) } else { ((ub - xb[i]) / delta, true) };
            let room = room.max(0.0);
            let better = match leave {
                None => room < step,
                Some((li, _)) => room < step || (room == step && var_order(basis[i]) < var_order(basis[li])),
            };
            if better {
                step = room;
                leave = Some((i, to_upper));
            }
        }
        if !step.is_finite() {
            return None;
        }
        for i in 0..m {
            xb[i] -= dir * step * w[i];
        }
        match leave {
            None => {
                // bound flip of the entering y
                if let Var::Y(j) = ev {
                    y_at_hi[j] = !y_at_hi[j];
                    y[j] = if y_at_hi[j] { hi[j] } else { lo[j] };
                }
            }
            Some((r, to_upper)) => {
                let entering_value = match ev {
                    Var::Y(j) => y[j] + dir * step,
                    _ => step,
                };
                match basis[r] {
                    Var::Y(j) => {
                        in_basis_y[j] = usize::MAX;
                        y_at_hi[j] = to_upper;
                        y[j] = if to_upper { hi[j] } else { lo[j] };
                    }
                    Var::S(_) | Var::Theta => {}
                }
                let piv = w[r];
                if piv.abs() < 1e-14 {
                    return None;
                }
                let row_r: Vec<f64> = binv[r].iter().map(|v| v / piv).collect();
                for i in 0..m {
                    if i == r {
                        continue;
                    }
                    let f = w[i];
                    if f != 0.0 {
                        for k in 0..m {
                            binv[i][k] -= f * row_r[k];
                        }
                    }
                }
                binv[r] = row_r;
                basis[r] = ev;
                xb[r] = entering_value;
                if let Var::Y(j) = ev {
                    in_basis_y[j] = r;
                }
            }
        }
    }
    None
}

fn var_order(v: Var) -> usize {
    match v {
        Var::Y(j) => j,
        Var::Theta => usize::MAX,
        Var::S(k) => 1 << 40 | k,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad_cut(x: [f64; 2]) -> Cut {
        // f(y) = (y0 - 1)^2 + 2 (y1 + 0.5)^2
        let f = (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2);
        Cut { x: x.to_vec(), f, g: vec![2.0 * (x[0] - 1.0), 4.0 * (x[1] + 0.5)] }
    }

    fn brute(cuts: &[Cut], lo: &[f64], hi: &[f64]) -> f64 {
        let steps = 2000;
        let mut best = f64::INFINITY;
        for a in 0..=steps {
            for b in 0..=steps {
                let y = [
                    lo[0] + (hi[0] - lo[0]) * a as f64 / steps as f64,
                    lo[1] + (hi[1] - lo[1]) * b as f64 / steps as f64,
                ];
                let v = cuts
                    .iter()
                    .map(|c| c.f + c.g[0] * (y[0] - c.x[0]) + c.g[1] * (y[1] - c.x[1]))
                    .fold(f64::NEG_INFINITY, f64::max);
                best = best.min(v);
            }
        }
        best
    }

    #[test]
    fn single_cut_snaps_to_box() {
        let c = Cut { x: vec![0.0, 0.0], f: 1.0, g: vec![1.0, -2.0] };
        assert_eq!(single_cut_bound(&c, &[-1.0, -1.0], &[1.0, 1.0]), 1.0 - 1.0 - 2.0);
    }

    #[test]
    fn three_cuts_match_dense_grid() {
        let cuts = vec![quad_cut([-1.0, 1.0]), quad_cut([2.0, -1.0]), quad_cut([0.5, 0.5])];
        let (lo, hi) = ([-2.0, -2.0], [2.0, 2.0]);
        let lp = max_affine_min(&cuts, &lo, &hi);
        let grid = brute(&cuts, &lo, &hi);
        // piecewise-linear: the grid can only overestimate, by at most slope * spacing
        assert!(lp <= grid + 1e-9 && grid - lp < 0.02, "lp {lp} grid {grid}");
    }

    #[test]
    fn cut_at_minimum_is_exact() {
        let cuts = vec![quad_cut([1.0, -0.5]), quad_cut([0.0, 0.0])];
        let v = max_affine_min(&cuts, &[-3.0, -3.0], &[3.0, 3.0]);
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn many_cuts_in_higher_dimension() {
        // f(y) = sum y_j^2 on [-1,1]^4 with cuts at random-ish points
        let pts: Vec<Vec<f64>> = (0..12)
            .map(|k| (0..4).map(|j| ((k * 7 + j * 3) % 11) as f64 / 5.5 - 1.0).collect())
            .collect();
        let cuts: Vec<Cut> = pts
            .iter()
            .map(|x| Cut { x: x.clone(), f: x.iter().map(|v| v * v).sum(), g: x.iter().map(|v| 2.0 * v).collect() })
            .collect();
        let lo = vec![-1.0; 4];
        let hi = vec![1.0; 4];
        let v = max_affine_min(&cuts, &lo, &hi);
        assert!(v <= 1e-12);
        let single = cuts.iter().map(|c| single_cut_bound(c, &lo, &hi)).fold(f64::NEG_INFINITY, f64::max);
        assert!(v >= single - 1e-12);
        // no grid point of the max-of-affines lies below the LP minimum
        let eval = |y: &[f64]| cuts.iter().map(|c| c.f + dot(&c.g, y) - dot(&c.g, &c.x)).fold(f64::NEG_INFINITY, f64::max);
        let mut grid_min = f64::INFINITY;
        let pts: Vec<f64> = (0..=16).map(|k| -1.0 + k as f64 / 8.0).collect();
        for &a in &pts {
            for &b in &pts {
                for &c in &pts {
                    for &d in &pts {
                        grid_min = grid_min.min(eval(&[a, b, c, d]));
                    }
                }
            }
        }
        assert!(v <= grid_min + 1e-12 && grid_min - v < 2.0, "{v} {grid_min}");
    }
}
