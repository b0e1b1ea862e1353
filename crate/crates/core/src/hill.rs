//! Harmonic-balance (Hill determinant) machinery for the periodic
//! linearization about the centre.
//!
//! With beta = 0 the linearized equation in mass-normalized time can be
//! brought to an Ince-type normal form; inserting a periodic ansatz and
//! collecting harmonics yields four infinite tridiagonal systems, one per
//! symmetry class of the solution (even/odd harmonics, cosine/sine).
//! Zeros of the truncated determinants as a function of `delta_hat` at
//! fixed `gamma` trace the transition curves that bound the instability
//! tongues.

use thiserror::Error;

/// Symmetry class of the periodic solution whose truncated Hill
/// determinant is being evaluated.
///
/// Even families contain harmonics of even index (period pi solutions in
/// the half-angle variable); odd families contain odd harmonics (period
/// 2*pi). Cosine/sine selects the parity in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeterminantFamily {
    EvenCosine,
    EvenSine,
    OddCosine,
    OddSine,
}

impl DeterminantFamily {
    pub const ALL: [DeterminantFamily; 4] = [
        DeterminantFamily::EvenCosine,
        DeterminantFamily::EvenSine,
        DeterminantFamily::OddCosine,
        DeterminantFamily::OddSine,
    ];

    /// Harmonic index represented by matrix row `row` (0-based).
    fn harmonic(self, row: usize) -> f64 {
        match self {
            DeterminantFamily::EvenCosine => 2.0 * row as f64,
            DeterminantFamily::EvenSine => 2.0 * row as f64 + 2.0,
            DeterminantFamily::OddCosine | DeterminantFamily::OddSine => 2.0 * row as f64 + 1.0,
        }
    }

    /// Unperturbed (gamma = 0) resonance location of the k-th root of this
    /// family's determinant, in delta_hat units.
    fn seed(self, k: usize, omega_m: f64) -> f64 {
        debug_assert!(k >= 1);
        match self {
            DeterminantFamily::OddCosine | DeterminantFamily::OddSine => {
                let h = (2 * k - 1) as f64 * omega_m / 2.0;
                h * h
            }
            DeterminantFamily::EvenCosine | DeterminantFamily::EvenSine => {
                let h = k as f64 * omega_m;
                h * h
            }
        }
    }
}

impl std::fmt::Display for DeterminantFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DeterminantFamily::EvenCosine => "even-cosine",
            DeterminantFamily::EvenSine => "even-sine",
            DeterminantFamily::OddCosine => "odd-cosine",
            DeterminantFamily::OddSine => "odd-sine",
        })
    }
}

impl std::str::FromStr for DeterminantFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "even-cosine" => Ok(DeterminantFamily::EvenCosine),
            "even-sine" => Ok(DeterminantFamily::EvenSine),
            "odd-cosine" => Ok(DeterminantFamily::OddCosine),
            "odd-sine" => Ok(DeterminantFamily::OddSine),
            _ => Err(format!(
                "unknown determinant family `{s}` (expected even-cosine, even-sine, odd-cosine or odd-sine)"
            )),
        }
    }
}

/// Coefficients of the Ince normal form
/// `(1 + a cos 2T) y'' + b sin 2T y' + (c + d cos 2T) y = 0`
/// equivalent to the undamped centre linearization after rescaling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InceCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl InceCoefficients {
    pub fn from_params(gamma: f64, delta_hat: f64, omega_m: f64) -> Self {
        let q = gamma * delta_hat;
        InceCoefficients {
            a: q,
            b: -2.0 * q,
            c: 4.0 * delta_hat / (omega_m * omega_m),
            d: 0.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HillError {
    /// No sign change of the determinant was found around the resonance
    /// seed, even after widening the bracket once.
    #[error(
        "no determinant sign change bracketing root k={k} of {family} at gamma={gamma} \
         (searched delta_hat in [{lo}, {hi}])"
    )]
    NoRootInBracket {
        family: DeterminantFamily,
        k: usize,
        gamma: f64,
        lo: f64,
        hi: f64,
    },
    /// The truncation order leaves too few harmonics beyond the resonant
    /// one for the root to be trustworthy.
    #[error("truncation order {n} is too small for tongue index k={k}; need n >= {needed}")]
    TruncationTooSmall { n: usize, k: usize, needed: usize },
    /// Closed-form series exist only for the odd families with k <= 3.
    #[error("no series prediction for {family} with k={k} (odd families, k <= 3 only)")]
    SeriesUnsupported { family: DeterminantFamily, k: usize },
}

/// Truncated Hill matrix of the requested family: `n` harmonics of the
/// appropriate parity, tridiagonal except for the folded first row.
///
/// Entries use q = gamma * delta_hat and c = 4 * delta_hat / omega_m^2:
/// row j carries diagonal c - j^2, sub-diagonal -(q/2) j (j-2) and
/// super-diagonal -(q/2) j (j+2). Folding the negative harmonics into the
/// first row gives the family-specific corrections: the even-cosine row 0
/// couples with weight -2q, and the odd families pick up +-q/2 on their
/// first diagonal entry (cosine +, sine -).
///
/// Panics if `n < 2`.
pub fn build_hill_matrix(
    family: DeterminantFamily,
    gamma: f64,
    delta_hat: f64,
    omega_m: f64,
    n: usize,
) -> Vec<Vec<f64>> {
    assert!(n >= 2, "Hill truncation needs at least two harmonics");
    let q = gamma * delta_hat;
    let c = 4.0 * delta_hat / (omega_m * omega_m);
    let mut m = vec![vec![0.0; n]; n];
    for (r, row) in m.iter_mut().enumerate() {
        let j = family.harmonic(r);
        let mut diag = c - j * j;
        if r == 0 {
            match family {
                DeterminantFamily::OddCosine => diag += q / 2.0,
                DeterminantFamily::OddSine => diag -= q / 2.0,
                _ => {}
            }
        }
        row[r] = diag;
        if r > 0 {
            row[r - 1] = -(q / 2.0) * j * (j - 2.0);
        }
        if r + 1 < n {
            row[r + 1] = if r == 0 && family == DeterminantFamily::EvenCosine {
                -2.0 * q
            } else {
                -(q / 2.0) * j * (j + 2.0)
            };
        }
    }
    m
}

/// Determinant via LU factorization with partial pivoting on a
/// row-equilibrated copy, so that pivots stay O(1) even though raw Hill
/// entries span many orders of magnitude.
///
/// Returns 0 for structurally singular input. The result can overflow to
/// +-infinity for very large matrices with huge entries (the sign is
/// still meaningful); Hill truncations of practical size stay well in
/// range.
pub fn det_eval(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    if n == 0 {
        return 1.0;
    }
    debug_assert!(matrix.iter().all(|r| r.len() == n), "matrix must be square");
    let mut a = Vec::with_capacity(n * n);
    let mut det = 1.0f64;
    for row in matrix {
        let s = row.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        if s == 0.0 {
            return 0.0;
        }
        det *= s;
        a.extend(row.iter().map(|&v| v / s));
    }
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].abs();
        for i in (k + 1)..n {
            let v = a[i * n + k].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            det = -det;
        }
        let pivot = a[k * n + k];
        det *= pivot;
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            if factor != 0.0 {
                for j in (k + 1)..n {
                    a[i * n + j] -= factor * a[k * n + j];
                }
            }
        }
    }
    det
}

/// Determinant of the truncated Hill matrix as a function of delta_hat.
fn transition_det(
    family: DeterminantFamily,
    gamma: f64,
    delta_hat: f64,
    omega_m: f64,
    n: usize,
) -> f64 {
    det_eval(&build_hill_matrix(family, gamma, delta_hat, omega_m, n))
}

/// Solves for the k-th transition curve point delta_hat*(gamma) of the
/// given family at fixed gamma and omega_m, using an n-harmonic
/// truncation.
///
/// The root is bracketed around the gamma = 0 resonance seed (bracket
/// radius 0.4 times the gap to the nearest neighbouring seed, widened
/// once on failure) and refined by a bisection/secant hybrid until the
/// bracket width drops below `tol` (absolute, in delta_hat units).
///
/// For gamma = 0 the seed itself is the exact root and is returned
/// directly.
///
/// Panics if `k == 0` or `tol <= 0`.
pub fn solve_transition_curve(
    family: DeterminantFamily,
    k: usize,
    gamma: f64,
    omega_m: f64,
    n: usize,
    tol: f64,
) -> Result<f64, HillError> {
    assert!(k >= 1, "tongue index starts at 1");
    assert!(tol > 0.0 && tol.is_finite(), "tolerance must be positive");
    let needed = 2 * k + 6;
    if n < needed {
        return Err(HillError::TruncationTooSmall { n, k, needed });
    }
    let seed = family.seed(k, omega_m);
    if gamma == 0.0 {
        return Ok(seed);
    }

    // Gap to the adjacent roots of the same determinant: below the first
    // seed the only barrier is delta_hat = 0 itself.
    let gap_low = if k >= 2 {
        seed - family.seed(k - 1, omega_m)
    } else {
        seed
    };
    let gap_high = family.seed(k + 1, omega_m) - seed;
    let base_radius = 0.4 * gap_low.min(gap_high);

    for widen in [1.0, 2.0] {
        let radius = base_radius * widen;
        let lo = seed - radius;
        let hi = seed + radius;
        if let Some(root) = bracket_and_refine(
            |x| transition_det(family, gamma, x, omega_m, n),
            lo,
            hi,
            seed,
            tol,
        ) {
            return Ok(root);
        }
    }
    let radius = 2.0 * base_radius;
    Err(HillError::NoRootInBracket {
        family,
        k,
        gamma,
        lo: seed - radius,
        hi: seed + radius,
    })
}

/// Scans [lo, hi] for the sign change closest to `near`, then refines it.
fn bracket_and_refine(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    near: f64,
    tol: f64,
) -> Option<f64> {
    const SCAN: usize = 16;
    let xs: Vec<f64> = (0..=SCAN)
        .map(|i| lo + (hi - lo) * i as f64 / SCAN as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for i in 0..SCAN {
        if fs[i] == 0.0 {
            return Some(xs[i]);
        }
        if fs[i].signum() != fs[i + 1].signum() && fs[i].is_finite() && fs[i + 1].is_finite() {
            let mid = 0.5 * (xs[i] + xs[i + 1]);
            let better = match best {
                None => true,
                Some((a, b, _, _)) => (mid - near).abs() < (0.5 * (a + b) - near).abs(),
            };
            if better {
                best = Some((xs[i], xs[i + 1], fs[i], fs[i + 1]));
            }
        }
    }
    let (mut a, mut b, mut fa, mut fb) = best?;

    // Alternate secant and bisection: the secant step gives fast local
    // convergence, the interleaved bisection guarantees the bracket
    // shrinks geometrically.
    for iter in 0..200 {
        let width = b - a;
        if width <= tol || width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        let x = if iter % 2 == 0 {
            let denom = fb - fa;
            let candidate = if denom != 0.0 {
                b - fb * (b - a) / denom
            } else {
                f64::NAN
            };
            if candidate.is_finite() && candidate > a + 0.01 * width && candidate < b - 0.01 * width
            {
                candidate
            } else {
                0.5 * (a + b)
            }
        } else {
            0.5 * (a + b)
        };
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    // Final secant estimate inside the converged bracket.
    let denom = fb - fa;
    let x = if denom != 0.0 {
        let s = b - fb * (b - a) / denom;
        if s >= a && s <= b {
            s
        } else {
            0.5 * (a + b)
        }
    } else {
        0.5 * (a + b)
    };
    Some(x)
}

/// Low-order series for the odd transition curves delta_hat(gamma),
/// k = 1, 2, 3. The leading corrections split the cosine and sine
/// branches at order gamma^(2k-1); even powers are shared.
pub fn series_prediction(
    family: DeterminantFamily,
    k: usize,
    gamma: f64,
    omega_m: f64,
) -> Result<f64, HillError> {
    let upper = match family {
        DeterminantFamily::OddCosine => -1.0,
        DeterminantFamily::OddSine => 1.0,
        _ => return Err(HillError::SeriesUnsupported { family, k }),
    };
    let w2 = omega_m * omega_m;
    match k {
        1 => {
            let w4 = w2 * w2;
            Ok(w2 / 4.0 + upper * w4 * gamma / 32.0)
        }
        2 => {
            let w6 = w2 * w2 * w2;
            let w8 = w6 * w2;
            Ok(9.0 * w2 / 4.0 - (16767.0 / 4096.0) * w6 * gamma.powi(2)
                + upper * (6561.0 / 131072.0) * w8 * gamma.powi(3))
        }
        3 => {
            let w6 = w2 * w2 * w2;
            let w10 = w6 * w2 * w2;
            let w12 = w10 * w2;
            Ok(25.0 * w2 / 4.0 - (1_109_375.0 / 12_288.0) * w6 * gamma.powi(2)
                + (3_030_048_828_125.0 / 1_811_939_328.0) * w10 * gamma.powi(4)
                + upper * (2_197_265_625.0 / 2_147_483_648.0) * w12 * gamma.powi(5))
        }
        _ => Err(HillError::SeriesUnsupported { family, k }),
    }
}

/// Width of the k-th odd instability tongue at fixed gamma: distance
/// between the sine and cosine branch roots.
pub fn tongue_width(k: usize, gamma: f64, omega_m: f64, n: usize) -> Result<f64, HillError> {
    let tol = 1e-13;
    let a = solve_transition_curve(DeterminantFamily::OddCosine, k, gamma, omega_m, n, tol)?;
    let b = solve_transition_curve(DeterminantFamily::OddSine, k, gamma, omega_m, n, tol)?;
    Ok((b - a).abs())
}

/// Relative residual of the even-family determinant identity
/// `det A_{n+1} = c det B_n` with c = 4 delta_hat / omega_m^2, where A is
/// the even-cosine and B the even-sine truncation. Holds exactly because
/// expanding det A along its first column (which is (c, 0, ..., 0)^T)
/// leaves precisely the even-sine matrix as the minor; the residual
/// therefore measures pure floating-point factorization noise.
///
/// Panics if `n < 2`.
pub fn coexistence_residual(gamma: f64, delta_hat: f64, omega_m: f64, n: usize) -> f64 {
    assert!(n >= 2, "identity needs at least a 2-harmonic sine matrix");
    let lhs = transition_det(DeterminantFamily::EvenCosine, gamma, delta_hat, omega_m, n + 1);
    let c = 4.0 * delta_hat / (omega_m * omega_m);
    let rhs = c * transition_det(DeterminantFamily::EvenSine, gamma, delta_hat, omega_m, n);
    let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
    (lhs - rhs).abs() / scale
}

/// First-tongue boundary pair with linear damping folded in:
///
///   delta_hat = omega_m^2/4 +- (omega_m^3/32) sqrt((gamma omega_m)^2 - (4 beta)^2).
///
/// Returns `None` when gamma < 4 beta / omega_m (damping closes the
/// tongue); at exact tangency both boundaries coincide. The radicand is
/// kept in factored form so the tangency case suffers no cancellation.
pub fn damped_first_tongue(gamma: f64, beta: f64, omega_m: f64) -> Option<(f64, f64)> {
    let radicand = (gamma * omega_m - 4.0 * beta) * (gamma * omega_m + 4.0 * beta);
    if radicand < 0.0 {
        return None;
    }
    let centre = omega_m * omega_m / 4.0;
    let half = omega_m.powi(3) / 32.0 * radicand.sqrt();
    Some((centre - half, centre + half))
}
