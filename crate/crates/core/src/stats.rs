//! Replicate statistics: means, variances, normal-theory confidence
//! intervals, order-statistic intervals and log-log exponent fits.

use serde::Serialize;

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Mean, unbiased variance and 95% confidence half-width for a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance; `NaN` when `count < 2`.
    pub variance: f64,
    /// Half-width of the normal-theory 95% interval for the mean.
    pub ci_half_width: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Summary { count, mean: f64::NAN, variance: f64::NAN, ci_half_width: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        if count < 2 {
            return Summary { count, mean, variance: f64::NAN, ci_half_width: f64::NAN };
        }
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let variance = ss / (count - 1) as f64;
        let ci_half_width = Z95 * (variance / count as f64).sqrt();
        Summary { count, mean, variance, ci_half_width }
    }

    pub fn ci_low(&self) -> f64 {
        self.mean - self.ci_half_width
    }

    pub fn ci_high(&self) -> f64 {
        self.mean + self.ci_half_width
    }

    /// Approximate 95% half-width for the variance itself, from the sample
    /// fourth central moment: Var(s²) ≈ (m4 − s⁴·(n−3)/(n−1)) / n.
    pub fn variance_ci_half_width(values: &[f64]) -> f64 {
        let n = values.len();
        if n < 4 {
            return f64::NAN;
        }
        let s = Summary::of(values);
        let m4 = values.iter().map(|v| (v - s.mean).powi(4)).sum::<f64>() / n as f64;
        let nf = n as f64;
        let var_s2 = (m4 - s.variance * s.variance * (nf - 3.0) / (nf - 1.0)) / nf;
        Z95 * var_s2.max(0.0).sqrt()
    }
}

/// Binomial proportion with a normal-approximation 95% half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub trials: usize,
    pub estimate: f64,
    pub ci_half_width: f64,
}

impl Proportion {
    pub fn new(successes: usize, trials: usize) -> Self {
        if trials == 0 {
            return Proportion { successes, trials, estimate: f64::NAN, ci_half_width: f64::NAN };
        }
        let p = successes as f64 / trials as f64;
        Proportion {
            successes,
            trials,
            estimate: p,
            ci_half_width: Z95 * (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Self {
        let (mut s, mut t) = (0, 0);
        for f in flags {
            t += 1;
            s += usize::from(f);
        }
        Proportion::new(s, t)
    }
}

/// Least-squares line `y = intercept + slope·x` with residual standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// `NaN` with fewer than three points.
    pub slope_std_err: f64,
    pub points: usize,
}

/// Unweighted least squares; `None` when fewer than two distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let m = xs.len();
    if m < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / m as f64;
    let my = ys.iter().sum::<f64>() / m as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_std_err = if m > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (ssr / (m - 2) as f64 / sxx).sqrt()
    } else {
        f64::NAN
    };
    Some(LineFit { slope, intercept, slope_std_err, points: m })
}

/// Log-log exponent fit; points with nonpositive coordinates are rejected.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.iter().chain(ys).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

/// Empirical quantile by the nearest-rank rule on a sorted copy.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[rank - 1]
}

/// Distribution-free 95% interval for the median from order statistics.
/// Returns `(lower, median, upper)`.
pub fn median_interval(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let med = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    let half = Z95 * (n as f64).sqrt() / 2.0;
    let lo = ((n as f64 / 2.0 - half).floor() as isize).clamp(1, n as isize) as usize;
    let hi = ((n as f64 / 2.0 + half).ceil() as isize + 1).clamp(1, n as isize) as usize;
    (v[lo - 1], med, v[hi - 1])
}

/// Pearson correlation with a Fisher-z 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
    /// False when one of the variables had zero sample variance; the
    /// estimate is then reported as 0 with a degenerate interval.
    pub defined: bool,
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> Correlation {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let sx = Summary::of(xs);
    let sy = Summary::of(ys);
    if n < 4 || !(sx.variance > 0.0) || !(sy.variance > 0.0) {
        return Correlation { estimate: 0.0, ci_low: 0.0, ci_high: 0.0, samples: n, defined: false };
    }
    let cov: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - sx.mean) * (y - sy.mean))
        .sum::<f64>()
        / (n - 1) as f64;
    let r = (cov / (sx.variance * sy.variance).sqrt()).clamp(-1.0, 1.0);
    let z = r.clamp(-0.999_999, 0.999_999).atanh();
    let se = 1.0 / ((n - 3) as f64).sqrt();
    Correlation {
        estimate: r,
        ci_low: (z - Z95 * se).tanh(),
        ci_high: (z + Z95 * se).tanh(),
        samples: n,
        defined: true,
    }
}
