//! Half-integer order Bessel functions `J_{l ∓ 1/2}` and their positive zeros.
//!
//! For half-integer order the Bessel function reduces to a spherical Bessel
//! function, `J_{n+1/2}(x) = sqrt(2x/π) j_n(x)`, with closed trigonometric
//! forms for `j_0` and `j_1`. Higher orders follow from the three-term
//! recurrence, run upward when `x ≥ ν` and downward (Miller) otherwise.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Which half-integer neighbour of the degree `l` the order refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HalfShift {
    Minus,
    Plus,
}

/// Bessel order `ν = l ± 1/2` with `l ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BesselOrder {
    l: u32,
    shift: HalfShift,
}

impl BesselOrder {
    pub fn new(l: u32, shift: HalfShift) -> Result<Self> {
        if l == 0 {
            return Err(Error::Domain("Bessel order needs degree l >= 1".into()));
        }
        Ok(Self { l, shift })
    }

    /// `J_{l-1/2}`, the order tied to the Robin (poloidal) boundary condition.
    pub fn minus(l: u32) -> Result<Self> {
        Self::new(l, HalfShift::Minus)
    }

    /// `J_{l+1/2}`, the order tied to the Dirichlet (toroidal) boundary condition.
    pub fn plus(l: u32) -> Result<Self> {
        Self::new(l, HalfShift::Plus)
    }

    /// Order from a half-integer value `ν ∈ {1/2, 3/2, ...}`.
    pub fn from_nu(nu: f64) -> Result<Self> {
        let n = nu - 0.5;
        if n < 0.0 || n.fract() != 0.0 {
            return Err(Error::Domain(format!("{nu} is not a positive half-integer")));
        }
        Self::minus(n as u32 + 1)
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn shift(&self) -> HalfShift {
        self.shift
    }

    pub fn nu(&self) -> f64 {
        self.spherical_index() as f64 + 0.5
    }

    /// Index `n` of the spherical Bessel function with `ν = n + 1/2`.
    pub fn spherical_index(&self) -> u32 {
        match self.shift {
            HalfShift::Minus => self.l - 1,
            HalfShift::Plus => self.l,
        }
    }
}

impl fmt::Display for BesselOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J_{{{}/2}}", 2 * self.spherical_index() + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselZero {
    pub order: BesselOrder,
    pub index: u32,
    pub value: f64,
}

/// Direction of the order recurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Recurrence {
    /// Upward when `x ≥ ν`, downward otherwise.
    #[default]
    Auto,
    Upward,
    Downward,
}

/// `J_ν(x)` for half-integer `ν`, `x > 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    bessel_j_with(order, x, Recurrence::Auto)
}

pub fn bessel_j_with(order: BesselOrder, x: f64, recurrence: Recurrence) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("J_nu(x) needs finite x > 0, got {x}")));
    }
    let n = order.spherical_index();
    let nu = order.nu();
    let downward = match recurrence {
        Recurrence::Auto => n >= 1 && x < nu,
        Recurrence::Upward => {
            if n >= 1 && x < nu {
                return Err(Error::UnstableRecurrence { order: nu, x });
            }
            false
        }
        Recurrence::Downward => n >= 1,
    };
    let jn = if downward {
        spherical_j_downward(n, x)
    } else {
        spherical_j_upward(n, x)
    };
    Ok((2.0 * x / PI).sqrt() * jn)
}

fn spherical_j0(x: f64) -> f64 {
    x.sin() / x
}

fn spherical_j1(x: f64) -> f64 {
    if x < 0.05 {
        // sin/x^2 - cos/x cancels badly near zero
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0)))
    } else {
        (x.sin() / x - x.cos()) / x
    }
}

fn spherical_j_upward(n: u32, x: f64) -> f64 {
    let j0 = spherical_j0(x);
    if n == 0 {
        return j0;
    }
    let mut prev = j0;
    let mut cur = spherical_j1(x);
    for k in 1..n {
        let next = (2 * k + 1) as f64 / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Miller's backward recurrence normalised with `Σ (2k+1) j_k(x)^2 = 1`.
fn spherical_j_downward(n: u32, x: f64) -> f64 {
    const BIG: f64 = 1e150;
    const RESCALE: f64 = 1e-150;
    let n = n as usize;
    let top = n + 30 + (x as usize) + (40.0 * (n as f64 + x)).sqrt() as usize;

    let mut next = 0.0; // f_{k+1}
    let mut cur = 1e-30; // f_k, starting at k = top
    let mut norm = (2 * top + 1) as f64 * cur * cur;
    let mut f_n = if top == n { cur } else { 0.0 };
    let mut f0 = 0.0;
    let mut f1 = 0.0;
    for k in (1..=top).rev() {
        let prev = (2 * k + 1) as f64 / x * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if cur.abs() > BIG {
            cur *= RESCALE;
            next *= RESCALE;
            f_n *= RESCALE;
            f1 *= RESCALE;
            norm *= RESCALE * RESCALE;
        }
        norm += (2 * idx + 1) as f64 * cur * cur;
        if idx == n {
            f_n = cur;
        }
        if idx == 1 {
            f1 = cur;
        }
        if idx == 0 {
            f0 = cur;
        }
    }
    let scale = 1.0 / norm.sqrt();
    // Orientation from whichever closed form is better conditioned here.
    let (j0, j1) = (spherical_j0(x), spherical_j1(x));
    let sign = if j0.abs() >= j1.abs() {
        (j0 * f0).signum()
    } else {
        (j1 * f1).signum()
    };
    sign * scale * f_n
}

/// The `k`-th positive zero of `J_ν`.
///
/// Sign changes are bracketed on a grid of spacing π/4, then refined by an
/// Illinois-modified regula falsi to an absolute accuracy well below 1e-10.
pub fn bessel_zero(order: BesselOrder, k: u32) -> Result<BesselZero> {
    if k == 0 {
        return Err(Error::Domain("Bessel zero index starts at 1".into()));
    }
    let nu = order.nu();
    let f = |x: f64| bessel_j(order, x);
    // J_ν is positive on (0, ν], so start the scan there.
    let mut a = 0.5 * nu;
    let mut fa = f(a)?;
    let x_limit = nu + (k as f64 + nu + 8.0) * PI * 2.0;
    let mut found = 0;
    while a < x_limit {
        let b = a + FRAC_PI_4;
        let fb = f(b)?;
        if fb == 0.0 {
            found += 1;
            if found == k {
                return Ok(BesselZero {
                    order,
                    index: k,
                    value: b,
                });
            }
        } else if fa != 0.0 && fa.signum() != fb.signum() {
            found += 1;
            if found == k {
                let value = refine_root(&f, a, b, fa, fb)?;
                return Ok(BesselZero {
                    order,
                    index: k,
                    value,
                });
            }
        }
        a = b;
        fa = fb;
    }
    Err(Error::RootNotConverged {
        lo: 0.5 * nu,
        hi: x_limit,
    })
}

fn refine_root<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (lo, hi) = (a, b);
    let mut side = 0i8;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let c = if c > a.min(b) && c < a.max(b) {
            c
        } else {
            0.5 * (a + b)
        };
        let fc = f(c)?;
        if fc == 0.0 || (b - a).abs() < 4.0 * f64::EPSILON * c.abs() {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < 1e-14 * c.abs().max(1.0) {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::RootNotConverged { lo, hi })
}

/// Free-decay eigenvalue `-j_{ν,k}^2`.
pub fn free_decay_eigenvalue(order: BesselOrder, k: u32) -> Result<f64> {
    let z = bessel_zero(order, k)?;
    Ok(-z.value * z.value)
}

/// Smallest positive zeros `(j_{l-1/2,1}, j_{l+1/2,1})`.
pub fn leading_zero_pair(l: u32) -> Result<(f64, f64)> {
    Ok((
        bessel_zero(BesselOrder::minus(l)?, 1)?.value,
        bessel_zero(BesselOrder::plus(l)?, 1)?.value,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Ascending series `Σ (-1)^m (x/2)^{2m+ν} / (m! Γ(m+ν+1))`, 40 terms.
    fn series_oracle(nu: f64, x: f64) -> f64 {
        // Γ(ν+1) for half-integer ν from Γ(1/2) = √π
        let mut gamma = PI.sqrt();
        let mut z = 0.5;
        while z < nu + 1.0 - 1e-12 {
            gamma *= z;
            z += 1.0;
        }
        let half = x / 2.0;
        let mut term = half.powf(nu) / gamma;
        let mut sum = term;
        for m in 1..40 {
            let m = m as f64;
            term *= -half * half / (m * (m + nu));
            sum += term;
        }
        sum
    }

    #[test]
    fn half_order_vanishes_at_pi() {
        let v = bessel_j(BesselOrder::minus(1).unwrap(), PI).unwrap();
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn three_halves_vanishes_near_example_value() {
        let v = bessel_j(BesselOrder::plus(1).unwrap(), 4.493409).unwrap();
        assert!(v.abs() < 1e-6, "{v}");
    }

    #[test]
    fn matches_power_series() {
        let order = BesselOrder::from_nu(2.5).unwrap();
        let got = bessel_j(order, 1.0).unwrap();
        let want = series_oracle(2.5, 1.0);
        assert!((got - want).abs() < 1e-10, "{got} vs {want}");

        for nu in [0.5, 1.5, 2.5, 5.5, 10.5] {
            let order = BesselOrder::from_nu(nu).unwrap();
            for x in [0.01, 0.3, 1.0, 2.5, 4.0, 7.5] {
                let got = bessel_j(order, x).unwrap();
                let want = series_oracle(nu, x);
                // the alternating series itself cancels for larger x
                let ok = if x <= 2.5 {
                    (got - want).abs() <= 1e-12 * want.abs()
                } else {
                    (got - want).abs() <= 1e-13
                };
                assert!(ok, "nu={nu} x={x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn directions_agree_where_both_are_stable() {
        let order = BesselOrder::from_nu(4.5).unwrap();
        for x in [5.0, 9.0, 20.0, 150.0] {
            let up = bessel_j_with(order, x, Recurrence::Upward).unwrap();
            let down = bessel_j_with(order, x, Recurrence::Downward).unwrap();
            assert!((up - down).abs() < 1e-12 * up.abs().max(1e-3), "x={x}: {up} vs {down}");
        }
    }

    #[test]
    fn domain_and_instability_errors() {
        let order = BesselOrder::from_nu(3.5).unwrap();
        assert!(matches!(bessel_j(order, 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_j(order, -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            bessel_j_with(order, 1.0, Recurrence::Upward),
            Err(Error::UnstableRecurrence { .. })
        ));
        assert!(bessel_j_with(order, 1.0, Recurrence::Downward).is_ok());
        assert!(BesselOrder::from_nu(1.0).is_err());
        assert!(BesselOrder::new(0, HalfShift::Plus).is_err());
    }

    #[test]
    fn known_zeros() {
        let half = BesselOrder::minus(1).unwrap();
        let z = bessel_zero(half, 1).unwrap().value;
        assert!((z - PI).abs() < 1e-12);
        let z3 = bessel_zero(half, 3).unwrap().value;
        assert!((z3 - 3.0 * PI).abs() < 1e-11);
        let three_halves = BesselOrder::plus(1).unwrap();
        let z = bessel_zero(three_halves, 1).unwrap().value;
        assert!((z - 4.493409457909064).abs() < 1e-10, "{z}");
        assert!(bessel_zero(half, 0).is_err());
    }

    #[test]
    fn free_decay_values() {
        let half = BesselOrder::minus(1).unwrap();
        assert!((free_decay_eigenvalue(half, 1).unwrap() + PI * PI).abs() < 1e-10);
        assert!((free_decay_eigenvalue(half, 2).unwrap() + 4.0 * PI * PI).abs() < 1e-9);
        let v = free_decay_eigenvalue(BesselOrder::plus(1).unwrap(), 1).unwrap();
        assert!((v + 4.493409_f64.powi(2)).abs() < 1e-5, "{v}");
    }

    #[test]
    fn zeros_interlace_and_are_roots() {
        for l in 1..=10 {
            let minus = BesselOrder::minus(l).unwrap();
            let plus = BesselOrder::plus(l).unwrap();
            let mut last = 0.0;
            for k in 1..=6 {
                let a = bessel_zero(minus, k).unwrap().value;
                let b = bessel_zero(plus, k).unwrap().value;
                assert!(last < a && a < b, "l={l} k={k}: {last} {a} {b}");
                last = b;
                assert!(bessel_j(minus, a).unwrap().abs() < 1e-9);
                assert!(bessel_j(plus, b).unwrap().abs() < 1e-9);
            }
        }
    }

    #[test]
    fn leading_zeros_grow_with_degree() {
        let (m1, p1) = leading_zero_pair(1).unwrap();
        for l in 2..=10 {
            let (m, p) = leading_zero_pair(l).unwrap();
            assert!(m1 <= m && p1 <= p);
        }
    }

    #[test]
    fn zeros_approach_multiples_of_pi() {
        for nu in [0.5, 1.5, 4.5] {
            let order = BesselOrder::from_nu(nu).unwrap();
            let mut prev = 0.0;
            for k in 1..=50 {
                let z = bessel_zero(order, k).unwrap().value;
                assert!(z > prev);
                prev = z;
                let offset = z - k as f64 * PI;
                assert!(offset.abs() < nu * PI / 2.0 + 1.0, "nu={nu} k={k} offset={offset}");
            }
        }
    }
}
