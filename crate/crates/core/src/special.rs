//! Scalar helpers on top of `libm`.

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub(crate) fn powf(x: f64, p: f64) -> f64 {
    libm::pow(x, p)
}

pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// `far^p − near^p` for `far ≥ near ≥ 0`, without cancellation when the two
/// distances are close.
pub(crate) fn pow_diff(far: f64, near: f64, p: f64) -> f64 {
    if near <= 0.0 {
        return powf(far, p);
    }
    let ratio = (far - near) / near;
    powf(near, p) * libm::expm1(p * libm::log1p(ratio))
}

/// Weights of the exponential moments over one linear element.
///
/// For `z = λH`, returns `(E, Z)` with
/// `E = ((1 − e^{−z})/z − e^{−z}) / z` and `Z = (1 − (1 − e^{−z})/z) / z`,
/// i.e. `∫₀^H e^{−λy} y/H dy = H·E` and `∫₀^H e^{−λy} (1 − y/H) dy = H·Z`.
/// Small `z` goes through the Taylor series to avoid cancellation.
pub(crate) fn element_moments(z: f64) -> (f64, f64) {
    if z < 0.125 {
        // E = Σ_{k≥1} (−1)^{k+1} k z^{k−1}/(k+1)!,  Z = Σ_{k≥1} (−1)^{k+1} z^{k−1}/(k+1)!
        let mut e = 0.0;
        let mut zz = 0.0;
        let mut term = 0.5; // z^{k-1}/(k+1)! at k = 1
        let mut sign = 1.0;
        for k in 1..=18 {
            e += sign * k as f64 * term;
            zz += sign * term;
            term *= z / (k + 2) as f64;
            sign = -sign;
        }
        (e, zz)
    } else {
        let ez = exp(-z);
        let phi1 = -libm::expm1(-z) / z;
        ((phi1 - ez) / z, (1.0 - phi1) / z)
    }
}
