//! Nelder–Mead simplex minimization.

#[derive(Debug, Clone, Copy)]
pub struct NelderMeadOptions {
    pub max_iterations: usize,
    /// Edge length of the axis-aligned initial simplex.
    pub initial_step: f64,
    /// Stop once the simplex diameter falls below this.
    pub x_tolerance: f64,
    /// Stop once the best value falls below this.
    pub f_target: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            initial_step: 0.5,
            x_tolerance: 1e-12,
            f_target: 1e-30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0` with the standard reflection / expansion /
/// contraction / shrink moves. Deterministic for a deterministic `f`.
pub fn nelder_mead(f: impl Fn(&[f64]) -> f64, x0: &[f64], opts: NelderMeadOptions) -> Minimum {
    let dim = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        let value = eval(x0);
        return Minimum {
            x: Vec::new(),
            value,
            iterations: 0,
            evaluations,
        };
    }

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += opts.initial_step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x)).collect();

    let mut iterations = 0;
    while iterations < opts.max_iterations {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[0] <= opts.f_target || diameter(&simplex) <= opts.x_tolerance {
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = &simplex[dim];
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(worst)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let fr = eval(&reflected);
        if fr < values[0] {
            let expanded = along(REFLECT * EXPAND);
            let fe = eval(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
            continue;
        }
        let (candidate, fc) = if fr < values[dim] {
            let outside = along(REFLECT * CONTRACT);
            let fo = eval(&outside);
            (outside, fo)
        } else {
            let inside = along(-CONTRACT);
            let fi = eval(&inside);
            (inside, fi)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = candidate;
            values[dim] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for i in 1..=dim {
            let shrunk: Vec<f64> = best
                .iter()
                .zip(&simplex[i])
                .map(|(b, v)| b + SHRINK * (v - b))
                .collect();
            values[i] = eval(&shrunk);
            simplex[i] = shrunk;
        }
    }

    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)))
        .expect("non-empty simplex");
    Minimum {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        evaluations,
    }
}

fn diameter(simplex: &[Vec<f64>]) -> f64 {
    let first = &simplex[0];
    simplex[1..]
        .iter()
        .map(|v| {
            v.iter()
                .zip(first)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
