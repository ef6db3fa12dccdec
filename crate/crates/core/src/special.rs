//! Special functions: Bessel J₁ and the Gamma function.
//!
//! Only what the kernel representations need, implemented directly so the
//! numerical core stays dependency-free and auditable.

/// Switch point between the power series and the asymptotic expansion of
/// J₁.  Both branches agree to better than 1e-10 here; see
/// [`j1_branch_agreement`] which is asserted once at model construction.
pub const J1_SWITCH: f64 = 12.0;

/// Bessel function of the first kind J₁(x) for x ≥ 0.
///
/// Power series below [`J1_SWITCH`], Hankel asymptotic expansion above.
pub fn bessel_j1(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < J1_SWITCH {
        j1_series(x)
    } else {
        j1_asymptotic(x)
    }
}

/// J₁(2√u)/√u for u ≥ 0, with the value 1 at u = 0.
///
/// This normalized form is what the kernel `g` of an exploding-moments
/// model is built from.  It is entire in u:
/// J₁(2√u)/√u = Σ_k (−u)^k / (k!(k+1)!).
pub fn j1_normalized(u: f64) -> f64 {
    debug_assert!(u >= 0.0);
    // 2√u < J1_SWITCH  ⇔  u < (J1_SWITCH/2)²
    if u < (J1_SWITCH / 2.0) * (J1_SWITCH / 2.0) {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            term *= -u / (kf * (kf + 1.0));
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-30) {
                break;
            }
        }
        sum
    } else {
        let r = u.sqrt();
        j1_asymptotic(2.0 * r) / r
    }
}

fn j1_series(x: f64) -> f64 {
    let q = x / 2.0;
    let mut term = q;
    let mut sum = q;
    for k in 1..200 {
        let kf = k as f64;
        term *= -(q * q) / (kf * (kf + 1.0));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

/// Hankel expansion: J₁(x) = √(2/(πx)) [P(x)cos χ − Q(x)sin χ],
/// χ = x − 3π/4, with the usual divergent series for P and Q truncated at
/// the smallest term.
fn j1_asymptotic(x: f64) -> f64 {
    let mu = 4.0; // 4ν² with ν = 1
    let chi = x - 3.0 * std::f64::consts::FRAC_PI_4;
    // a_k = Π_{m=1..k} (μ − (2m−1)²) / (k! 8^k);  P = Σ (−1)^j a_{2j}/x^{2j},
    // Q = Σ (−1)^j a_{2j+1}/x^{2j+1}.
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a: f64 = 1.0; // a_k x^{-k}, starting at k = 0
    let mut last = f64::INFINITY;
    for k in 0..30u32 {
        let mag = a.abs();
        if mag > last {
            break; // divergent tail reached
        }
        last = mag;
        let j = k / 2;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
        let m = (k + 1) as f64;
        a *= (mu - (2.0 * m - 1.0) * (2.0 * m - 1.0)) / (m * 8.0 * x);
    }
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Relative disagreement of the two J₁ branches at the switch point.
pub fn j1_branch_agreement() -> f64 {
    let s = j1_series(J1_SWITCH);
    let a = j1_asymptotic(J1_SWITCH);
    (s - a).abs() / s.abs().max(a.abs())
}

/// Γ(x) for x > 0 via the Lanczos approximation (g = 7, 9 terms),
/// accurate to ~1e-13 relative error on the range used here (x ∈ (0, 2)).
pub fn gamma_fn(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const G: f64 = 7.0;
    const C: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // reflection formula
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * gamma_fn(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = C[0];
        for (i, &c) in C.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        let t = x + G + 0.5;
        (2.0 * std::f64::consts::PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn j1_small_values() {
        // Reference values (Abramowitz & Stegun / mpmath).
        assert_abs_diff_eq!(bessel_j1(0.0), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bessel_j1(1.0), 0.4400505857449335, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j1(2.0), 0.5767248077568734, epsilon = 1e-13);
        assert_abs_diff_eq!(bessel_j1(5.0), -0.3275791375914652, epsilon = 1e-13);
    }

    #[test]
    fn j1_large_values() {
        assert_abs_diff_eq!(bessel_j1(15.0), 0.2051040386135228, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j1(30.0), -0.1187510626166239, epsilon = 1e-10);
        assert_abs_diff_eq!(bessel_j1(100.0), -0.07714535201411215, epsilon = 1e-10);
    }

    #[test]
    fn branches_agree_at_switch() {
        assert!(j1_branch_agreement() < 1e-10);
    }

    #[test]
    fn j1_normalized_matches_j1() {
        for &u in &[1e-8, 0.1, 1.0, 10.0, 35.9, 36.1, 100.0] {
            let r: f64 = u;
            let direct = bessel_j1(2.0 * r.sqrt()) / r.sqrt();
            assert_abs_diff_eq!(j1_normalized(u), direct, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(j1_normalized(0.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gamma_reference_values() {
        assert_abs_diff_eq!(gamma_fn(1.0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(gamma_fn(0.5), std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(gamma_fn(5.0), 24.0, epsilon = 1e-10);
        // Γ(0.75) (mpmath)
        assert_abs_diff_eq!(gamma_fn(0.75), 1.225416702465178, epsilon = 1e-12);
    }
}
