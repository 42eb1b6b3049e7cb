//! Cylinder special functions: J_n, Y_n (internal), H_n^(1), and the
//! modified pair I_n, K_n in exponentially scaled form, all with first
//! derivatives.
//!
//! The algorithms are the classic Steed/Temme continued-fraction scheme:
//! a downward continued fraction fixes the ratio Z'_ν/Z_ν, a second
//! continued fraction (or a Temme series for small argument) fixes the
//! normalization, and stable recurrences move between orders.  Accuracy is
//! near machine precision for n ≤ 50 and 1e-300 < x ≤ 1e4, which covers
//! every argument produced by the Green-tensor quadratures.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

const EPS: f64 = 1.0e-16;
const FPMIN: f64 = 1.0e-290;
const MAXIT: usize = 30_000;
/// Switchover between the Temme series and the large-x continued fraction.
const XMIN: f64 = 2.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, PartialEq)]
pub enum SpecFunError {
    #[error("argument {0:.6e} outside the domain (requires x > 0)")]
    Domain(f64),
    #[error("continued fraction failed to converge at n={n}, x={x:.6e}")]
    NoConvergence { n: u32, x: f64 },
}

/// J_n, Y_n and derivatives at a common (n, x).
#[derive(Debug, Clone, Copy)]
pub struct BesselJY {
    pub j: f64,
    pub jp: f64,
    pub y: f64,
    pub yp: f64,
}

/// Exponentially scaled modified Bessel values:
/// `i = I_n(x)·e^(−x)`, `ip = I_n'(x)·e^(−x)`, `k = K_n(x)·e^(x)`,
/// `kp = K_n'(x)·e^(x)`.  Products like I_n(a)K_n(b) are reassembled as
/// `i·k·e^(a−b)` without intermediate overflow.
#[derive(Debug, Clone, Copy)]
pub struct ScaledIK {
    pub i: f64,
    pub ip: f64,
    pub k: f64,
    pub kp: f64,
}

impl ScaledIK {
    /// Unscaled I_n(x); overflows to +∞ for x ≳ 700 by design.
    pub fn i_unscaled(&self, x: f64) -> f64 {
        self.i * x.exp()
    }

    /// Unscaled K_n(x); underflows to 0 for x ≳ 700 by design.
    pub fn k_unscaled(&self, x: f64) -> f64 {
        self.k * (-x).exp()
    }
}

/// J_n(x) and J_n'(x) for any finite real x (entire functions).
pub fn bessel_j(n: u32, x: f64) -> (f64, f64) {
    if x == 0.0 {
        let j = if n == 0 { 1.0 } else { 0.0 };
        let jp = if n == 1 { 0.5 } else { 0.0 };
        return (j, jp);
    }
    if x < 0.0 {
        // parity: J_n(−x) = (−1)^n J_n(x)
        let (j, jp) = bessel_j(n, -x);
        let s = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        return (s * j, -s * jp);
    }
    let r = bessel_jy(n, x).expect("x > 0 by construction");
    (r.j, r.jp)
}

/// H_n^(1)(x) = J_n(x) + iY_n(x) and its derivative, x > 0.
pub fn hankel1(n: u32, x: f64) -> Result<(Complex64, Complex64), SpecFunError> {
    let r = bessel_jy(n, x)?;
    Ok((
        Complex64::new(r.j, r.y),
        Complex64::new(r.jp, r.yp),
    ))
}

/// Unscaled I_n, I_n', K_n, K_n' (x > 0).  Prefer [`bessel_ik_scaled`] when
/// products of large/small factors are needed.
pub fn modified_i_k(n: u32, x: f64) -> Result<(f64, f64, f64, f64), SpecFunError> {
    let s = bessel_ik_scaled(n, x)?;
    let (ep, em) = (x.exp(), (-x).exp());
    Ok((s.i * ep, s.ip * ep, s.k * em, s.kp * em))
}

/// J_n, Y_n with derivatives by Steed's method (x > 0).
pub fn bessel_jy(n: u32, x: f64) -> Result<BesselJY, SpecFunError> {
    if x <= 0.0 || !x.is_finite() {
        return Err(SpecFunError::Domain(x));
    }
    let xnu = n as f64;
    let nl: i64 = if x < XMIN {
        n as i64
    } else {
        ((xnu - x + 1.5).floor() as i64).max(0)
    };
    let xmu = xnu - nl as f64;
    let xmu2 = xmu * xmu;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI; // Wronskian J_ν Y_ν' − J_ν' Y_ν

    // CF1 for f = J'_ν/J_ν, with sign tracking
    let mut isign: f64 = 1.0;
    let mut h = (xnu * xi).max(FPMIN);
    let mut b = xi2 * xnu;
    let mut d = 0.0;
    let mut cc = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        cc = b - 1.0 / cc;
        if cc.abs() < FPMIN {
            cc = FPMIN;
        }
        d = 1.0 / d;
        let del = cc * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::NoConvergence { n, x });
    }

    // downward recurrence from ν to μ
    let mut rjl = isign * FPMIN;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let rjp1 = rjpl;
    let mut fact = xnu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let (rjmu, mut rymu, mut ry1, rymup);
    if x < XMIN {
        // Temme series for Y_μ, Y_{μ+1}; μ = 0 exactly for integer orders,
        // so the Γ-related coefficients reduce to constants.
        debug_assert_eq!(xmu, 0.0);
        let x2 = 0.5 * x;
        let dlog = -x2.ln();
        let gam1 = -EULER_GAMMA;
        let gam2 = 1.0;
        let mut ff = 2.0 / PI * (gam1 + gam2 * dlog);
        let mut p = 1.0 / PI;
        let mut q = 1.0 / PI;
        let mut c = 1.0;
        let dd = -x2 * x2;
        let mut sum = ff;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * p - fi * del;
            sum1 += del1;
            if del.abs() < (1.0 + sum.abs()) * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SpecFunError::NoConvergence { n, x });
        }
        rymu = -sum;
        ry1 = -sum1 * xi2;
        rymup = xmu * xi * rymu - ry1;
        rjmu = w / (rymup - f * rymu);
    } else {
        // CF2 in the complex plane for p + iq = (J' + iY')/(J + iY)
        let mut a = 0.25 - xmu2;
        let mut p = -0.5 * xi;
        let mut q = 1.0;
        let br = 2.0 * x;
        let mut bi = 2.0;
        let mut fact = a * xi / (p * p + q * q);
        let mut cr = br + q * fact;
        let mut ci = bi + p * fact;
        let mut den = br * br + bi * bi;
        let mut dr = br / den;
        let mut di = -bi / den;
        let dlr = cr * dr - ci * di;
        let dli = cr * di + ci * dr;
        let temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        let mut ok = false;
        for i in 2..=MAXIT {
            a += 2.0 * (i as f64 - 1.0);
            bi += 2.0;
            dr = a * dr + br;
            di = a * di + bi;
            if dr.abs() + di.abs() < FPMIN {
                dr = FPMIN;
            }
            fact = a / (cr * cr + ci * ci);
            cr = br + cr * fact;
            ci = bi - ci * fact;
            if cr.abs() + ci.abs() < FPMIN {
                cr = FPMIN;
            }
            den = dr * dr + di * di;
            dr /= den;
            di = -di / den;
            let dlr = cr * dr - ci * di;
            let dli = cr * di + ci * dr;
            let temp = p * dlr - q * dli;
            q = p * dli + q * dlr;
            p = temp;
            if (dlr - 1.0).abs() + dli.abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SpecFunError::NoConvergence { n, x });
        }
        let gam = (p - f) / q;
        let mut rjmu_v = (w / ((p - f) * gam + q)).sqrt();
        rjmu_v = rjmu_v.copysign(rjl);
        rjmu = rjmu_v;
        rymu = rjmu * gam;
        rymup = rymu * (p + q / gam);
        ry1 = xmu * xi * rymu - rymup;
    }
    let _ = rymup;

    let fact = rjmu / rjl;
    let j = rjl1 * fact;
    let jp = rjp1 * fact;
    // upward recurrence for Y from μ to ν
    for i in 1..=nl {
        let rytemp = (xmu + i as f64) * xi2 * ry1 - rymu;
        rymu = ry1;
        ry1 = rytemp;
    }
    let y = rymu;
    let yp = xnu * xi * y - ry1;
    Ok(BesselJY { j, jp, y, yp })
}

/// Scaled I_n, K_n with derivatives by the Temme/Thompson–Barnett scheme
/// (x > 0).  Everything is computed in scaled space so that no intermediate
/// quantity overflows for x up to at least 1e4.
pub fn bessel_ik_scaled(n: u32, x: f64) -> Result<ScaledIK, SpecFunError> {
    if x <= 0.0 || !x.is_finite() {
        return Err(SpecFunError::Domain(x));
    }
    let xnu = n as f64;
    let nl = n as i64; // integer order: μ = 0
    let xmu = 0.0f64;
    let xmu2 = 0.0f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;

    // CF1 for f = I'_ν/I_ν
    let mut h = (xnu * xi).max(FPMIN);
    let mut b = xi2 * xnu;
    let mut d = 0.0;
    let mut cc = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = 1.0 / (b + d);
        cc = b + 1.0 / cc;
        let del = cc * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::NoConvergence { n, x });
    }
    let mut ril = FPMIN;
    let mut ripl = h * ril;
    let ril1 = ril;
    let rip1 = ripl;
    let mut fact = xnu * xi;
    for _ in 0..nl {
        let ritemp = fact * ril + ripl;
        fact -= xi;
        ripl = fact * ritemp + ril;
        ril = ritemp;
    }
    let f = ripl / ril;

    // K_μ, K_{μ+1} in scaled form (×e^x)
    let (mut rkmu, mut rk1);
    if x < XMIN {
        // Temme series (μ = 0), then scale by e^x (safe: x < 2)
        let x2 = 0.5 * x;
        let dlog = -x2.ln();
        let gam1 = -EULER_GAMMA;
        let gam2 = 1.0;
        let mut ff = gam1 + gam2 * dlog;
        let mut sum = ff;
        let mut p = 0.5;
        let mut q = 0.5;
        let mut c = 1.0;
        let dd = x2 * x2;
        let mut sum1 = p;
        let mut ok = false;
        for i in 1..=MAXIT {
            let fi = i as f64;
            ff = (fi * ff + p + q) / (fi * fi - xmu2);
            c *= dd / fi;
            p /= fi - xmu;
            q /= fi + xmu;
            let del = c * ff;
            sum += del;
            let del1 = c * (p - fi * ff);
            sum1 += del1;
            if del.abs() < sum.abs() * EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SpecFunError::NoConvergence { n, x });
        }
        let ex = x.exp();
        rkmu = sum * ex;
        rk1 = sum1 * xi2 * ex;
    } else {
        // Steed's CF2 for K; the natural result is already scaled by e^x
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut delh = d;
        let mut hh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let a1 = 0.25 - xmu2;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        let mut ok = false;
        for i in 2..=MAXIT {
            a -= 2.0 * (i as f64 - 1.0);
            c = -a * c / i as f64;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            hh += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < EPS {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(SpecFunError::NoConvergence { n, x });
        }
        hh *= a1;
        rkmu = (PI / (2.0 * x)).sqrt() / s;
        rk1 = rkmu * (xmu + x + 0.5 - hh) * xi;
    }
    let rkmup = xmu * xi * rkmu - rk1;
    // Wronskian I_μ K'_μ − I'_μ K_μ = −1/x fixes the I normalization;
    // in scaled space the e^x and e^{−x} factors cancel.
    let rimu = xi / (f * rkmu - rkmup);
    let i_scaled = rimu * ril1 / ril;
    let ip_scaled = rimu * rip1 / ril;
    // upward recurrence for scaled K
    for i in 1..=nl {
        let rktemp = (xmu + i as f64) * xi2 * rk1 + rkmu;
        rkmu = rk1;
        rk1 = rktemp;
    }
    let k_scaled = rkmu;
    let kp_scaled = xnu * xi * rkmu - rk1;
    Ok(ScaledIK {
        i: i_scaled,
        ip: ip_scaled,
        k: k_scaled,
        kp: kp_scaled,
    })
}
