//! Nelder–Mead minimization for small, smooth, unconstrained problems.

#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    /// Total objective evaluations allowed, restarts included.
    pub max_evals: usize,
    /// Stop when the spread of objective values over the simplex drops below this.
    pub abs_tol: f64,
    /// Edge length of the initial simplex.
    pub step: f64,
    /// Fresh simplices built around the incumbent after convergence.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 500,
            abs_tol: 1e-12,
            step: 0.5,
            restarts: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;
const MIN_DIAMETER: f64 = 1e-14;

impl NelderMead {
    /// Minimize `f` from `x0`. The returned value is never worse than `f(x0)`.
    pub fn minimize(&self, mut f: impl FnMut(&[f64]) -> f64, x0: &[f64]) -> Minimum {
        let mut best = Minimum {
            x: x0.to_vec(),
            value: f(x0),
            evals: 1,
        };
        if x0.is_empty() {
            return best;
        }
        let mut step = self.step;
        for _ in 0..=self.restarts {
            if best.evals >= self.max_evals {
                break;
            }
            let budget = self.max_evals - best.evals;
            let (x, value, used) = self.run(&mut f, &best.x, best.value, step, budget);
            best.evals += used;
            let gain = best.value - value;
            if value < best.value {
                best.x = x;
                best.value = value;
            }
            if gain.is_nan() || gain <= self.abs_tol {
                break;
            }
            step *= 0.5;
        }
        best
    }

    fn run(
        &self,
        f: &mut impl FnMut(&[f64]) -> f64,
        x0: &[f64],
        f0: f64,
        step: f64,
        budget: usize,
    ) -> (Vec<f64>, f64, usize) {
        let dim = x0.len();
        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };
        let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
        for j in 0..dim {
            if evals >= budget {
                break;
            }
            let mut x = x0.to_vec();
            x[j] += step;
            let v = eval(&x, &mut evals);
            simplex.push((x, v));
        }
        if simplex.len() < dim + 1 {
            return best_of(simplex, evals);
        }

        while evals < budget {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[dim].1 - simplex[0].1;
            if spread < self.abs_tol || diameter(&simplex) < MIN_DIAMETER {
                break;
            }
            let centroid: Vec<f64> = (0..dim)
                .map(|j| simplex[..dim].iter().map(|p| p.0[j]).sum::<f64>() / dim as f64)
                .collect();
            let worst = simplex[dim].clone();
            let along = |t: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&worst.0)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let xr = along(REFLECT);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(EXPAND);
                let fe = if evals < budget { eval(&xe, &mut evals) } else { f64::INFINITY };
                simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[dim - 1].1 {
                simplex[dim] = (xr, fr);
                continue;
            }
            if evals >= budget {
                break;
            }
            // outside contraction if the reflection helped at all, inside otherwise
            let xc = along(if fr < worst.1 { CONTRACT } else { -CONTRACT });
            let fc = eval(&xc, &mut evals);
            if fc < worst.1.min(fr) {
                simplex[dim] = (xc, fc);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for p in simplex.iter_mut().skip(1) {
                if evals >= budget {
                    break;
                }
                for (x, a) in p.0.iter_mut().zip(&anchor) {
                    *x = a + SHRINK * (*x - a);
                }
                p.1 = eval(&p.0, &mut evals);
            }
        }
        best_of(simplex, evals)
    }
}

fn best_of(simplex: Vec<(Vec<f64>, f64)>, evals: usize) -> (Vec<f64>, f64, usize) {
    let (x, v) = simplex
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("simplex has the starting point");
    (x, v, evals)
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let base = &simplex[0].0;
    simplex[1..]
        .iter()
        .map(|p| {
            p.0.iter()
                .zip(base)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
