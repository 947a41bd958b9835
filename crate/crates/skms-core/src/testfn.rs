//! Closed-form calculus of vector-valued Schwartz functions.
//!
//! Functions are finite combinations of scaled, shifted, optionally modulated
//! Hermite functions. The family is closed under derivative, translation,
//! complex conjugation, reflection, and Fourier transform, and inner products
//! have exact Gaussian-polynomial formulas. That keeps every downstream kernel
//! integral one-dimensional: no FFT grids, no sampled function data.
//!
//! A term stores `coeff * scale^{-1/2} * h_n((x-shift)/scale) * e^{i mod x}`
//! in one component, where `h_n` is the L2-normalized Hermite function. The
//! modulation field is 0 for plain Hermite data; it exists because frequency
//! shifts are what produce test functions whose spectral weight sits on the
//! negative half-line.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One Hermite term. See the module docs for the pointwise formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub component: usize,
    pub order: u32,
    pub scale: f64,
    pub shift: f64,
    pub modulation: f64,
    pub coeff: Complex64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub component_count: usize,
    pub terms: Vec<Term>,
}

fn fact(n: u32) -> f64 {
    let mut f = 1.0;
    for k in 2..=n {
        f *= k as f64;
    }
    f
}

fn binom(n: u32, k: u32) -> f64 {
    let mut b = 1.0;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b
}

/// Normalized Hermite function h_n(u), real argument.
pub fn hermite_value(n: u32, u: f64) -> f64 {
    let h0 = PI.powf(-0.25) * (-0.5 * u * u).exp();
    if n == 0 {
        return h0;
    }
    let mut prev = h0;
    let mut cur = 2.0f64.sqrt() * u * h0;
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * u * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Physicists' Hermite polynomial H_n at a complex argument.
fn hermite_poly(n: u32, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * (k as f64) * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl Term {
    pub fn evaluate(&self, x: f64) -> Complex64 {
        let u = (x - self.shift) / self.scale;
        let base = self.scale.powf(-0.5) * hermite_value(self.order, u);
        let phase = Complex64::new(0.0, self.modulation * x).exp();
        self.coeff * base * phase
    }
}

impl TestFunction {
    pub fn zero(component_count: usize) -> Self {
        assert!(component_count >= 1, "need at least one component");
        TestFunction {
            component_count,
            terms: Vec::new(),
        }
    }

    /// L2-normalized Hermite function of the given order, scaled and centered.
    pub fn hermite(order: u32, scale: f64, shift: f64, component: usize) -> Self {
        assert!(scale > 0.0, "scale must be positive, got {scale}");
        TestFunction {
            component_count: component + 1,
            terms: vec![Term {
                component,
                order,
                scale,
                shift,
                modulation: 0.0,
                coeff: Complex64::new(1.0, 0.0),
            }],
        }
    }

    /// Same data multiplied by the plane wave e^{i mu x}.
    pub fn modulated_hermite(order: u32, scale: f64, shift: f64, mu: f64, component: usize) -> Self {
        let mut f = Self::hermite(order, scale, shift, component);
        f.terms[0].modulation = mu;
        f
    }

    pub fn with_component_count(mut self, d: usize) -> Self {
        assert!(
            self.terms.iter().all(|t| t.component < d),
            "component index out of range"
        );
        self.component_count = d;
        self
    }

    pub fn evaluate(&self, component: usize, x: f64) -> Complex64 {
        self.terms
            .iter()
            .filter(|t| t.component == component)
            .map(|t| t.evaluate(x))
            .sum()
    }

    pub fn add(&self, other: &TestFunction) -> TestFunction {
        let mut terms = self.terms.clone();
        terms.extend_from_slice(&other.terms);
        TestFunction {
            component_count: self.component_count.max(other.component_count),
            terms,
        }
    }

    pub fn scale(&self, c: Complex64) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * c,
                ..*t
            })
            .collect();
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    pub fn sub(&self, other: &TestFunction) -> TestFunction {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn derivative(&self) -> TestFunction {
        let mut terms = Vec::with_capacity(3 * self.terms.len());
        for t in &self.terms {
            let n = t.order as f64;
            if t.order > 0 {
                terms.push(Term {
                    order: t.order - 1,
                    coeff: t.coeff * (n / 2.0).sqrt() / t.scale,
                    ..*t
                });
            }
            terms.push(Term {
                order: t.order + 1,
                coeff: -t.coeff * ((n + 1.0) / 2.0).sqrt() / t.scale,
                ..*t
            });
            if t.modulation != 0.0 {
                terms.push(Term {
                    coeff: t.coeff * Complex64::new(0.0, t.modulation),
                    ..*t
                });
            }
        }
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    /// f(. - t): the function translated to the right by `t`.
    pub fn translate(&self, t: f64) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|tm| Term {
                shift: tm.shift + t,
                coeff: tm.coeff * Complex64::new(0.0, -tm.modulation * t).exp(),
                ..*tm
            })
            .collect();
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    /// Pointwise complex conjugate.
    pub fn conjugate(&self) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                modulation: -t.modulation,
                coeff: t.coeff.conj(),
                ..*t
            })
            .collect();
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    /// x -> f(-x).
    pub fn reflect(&self) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let sign = if t.order % 2 == 0 { 1.0 } else { -1.0 };
                Term {
                    shift: -t.shift,
                    modulation: -t.modulation,
                    coeff: t.coeff * sign,
                    ..*t
                }
            })
            .collect();
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    /// Fourier transform, convention f^(p) = (2 pi)^{-1/2} Int f(x) e^{-ipx} dx.
    ///
    /// The unit Hermite function of order n is an eigenfunction with
    /// eigenvalue (-i)^n; shifts become modulations and vice versa.
    pub fn fourier(&self) -> TestFunction {
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let eig = Complex64::new(0.0, -1.0).powu(t.order);
                let phase = Complex64::new(0.0, t.shift * t.modulation).exp();
                Term {
                    order: t.order,
                    scale: 1.0 / t.scale,
                    shift: t.modulation,
                    modulation: -t.shift,
                    coeff: t.coeff * eig * phase,
                    component: t.component,
                }
            })
            .collect();
        TestFunction {
            component_count: self.component_count,
            terms,
        }
    }

    /// Frequency-side data in the opposite sign convention:
    /// fourier_plus(f)(p) = fourier(f)(-p). The kernel integrals consume this.
    pub fn fourier_plus(&self) -> TestFunction {
        self.fourier().reflect()
    }

    /// Exact inner product Int conj(f) g dx, summed over components.
    pub fn l2_inner(&self, other: &TestFunction) -> Complex64 {
        assert_eq!(
            self.component_count, other.component_count,
            "component count mismatch"
        );
        let mut total = Complex64::new(0.0, 0.0);
        for s in &self.terms {
            for t in &other.terms {
                if s.component != t.component {
                    continue;
                }
                total += s.coeff.conj() * t.coeff * term_pair_integral(s, t);
            }
        }
        total
    }

    pub fn norm_sq(&self) -> f64 {
        self.l2_inner(self).re.max(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// L2 distance below `tol` relative to the larger of the two norms (or
    /// absolutely, when both are small).
    pub fn approx_eq(&self, other: &TestFunction, tol: f64) -> bool {
        let d2 = self.norm_sq() + other.norm_sq() - 2.0 * self.l2_inner(other).re;
        let scale = self.norm().max(other.norm()).max(1e-30);
        d2.max(0.0).sqrt() <= tol * scale.max(1.0)
    }

    /// True when the function equals its own conjugate in L2.
    pub fn real_valued(&self) -> bool {
        let diff = self.sub(&self.conjugate());
        diff.norm_sq() <= 1e-24 * (1.0 + self.norm_sq())
    }

    /// Merge structurally identical terms and drop negligible coefficients.
    pub fn simplify(&self, drop_tol: f64) -> TestFunction {
        let mut kept: Vec<Term> = Vec::new();
        'outer: for t in &self.terms {
            for k in kept.iter_mut() {
                if k.component == t.component
                    && k.order == t.order
                    && k.scale == t.scale
                    && k.shift == t.shift
                    && k.modulation == t.modulation
                {
                    k.coeff += t.coeff;
                    continue 'outer;
                }
            }
            kept.push(*t);
        }
        kept.retain(|t| t.coeff.norm() > drop_tol);
        TestFunction {
            component_count: self.component_count,
            terms: kept,
        }
    }
}

/// Int h-term_s(x)* h-term_t(x) dx for unit coefficients.
///
/// Completing the square reduces the integral to central Gaussian moments of
/// a product of two Hermite polynomials Taylor-expanded around the (complex)
/// stationary point.
fn term_pair_integral(s: &Term, t: &Term) -> Complex64 {
    let (m, n) = (s.order, t.order);
    let (s1, s2) = (s.scale, t.scale);
    let (a1, a2) = (s.shift, t.shift);
    let big_a = 0.5 / (s1 * s1) + 0.5 / (s2 * s2);
    let big_b = Complex64::new(
        a1 / (s1 * s1) + a2 / (s2 * s2),
        t.modulation - s.modulation,
    );
    let big_c = -a1 * a1 / (2.0 * s1 * s1) - a2 * a2 / (2.0 * s2 * s2);
    let z0 = big_b / (2.0 * big_a);
    let d = big_b * big_b / (4.0 * big_a) + big_c;
    let alpha1 = (z0 - a1) / s1;
    let alpha2 = (z0 - a2) / s2;

    // central moments: mom[k] = Int u^{2k} e^{-A u^2} du
    let max_half = ((m + n) / 2 + 1) as usize;
    let mut mom = vec![0.0f64; max_half + 1];
    mom[0] = (PI / big_a).sqrt();
    for k in 1..=max_half {
        mom[k] = mom[k - 1] * (2.0 * k as f64 - 1.0) / (2.0 * big_a);
    }

    let h1: Vec<Complex64> = (0..=m).map(|k| hermite_poly(k, alpha1)).collect();
    let h2: Vec<Complex64> = (0..=n).map(|l| hermite_poly(l, alpha2)).collect();

    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=m {
        for l in 0..=n {
            let pow = (m - k) + (n - l);
            if pow % 2 == 1 {
                continue;
            }
            let w = binom(m, k)
                * binom(n, l)
                * 2.0f64.powi(pow as i32)
                * s1.powi(-((m - k) as i32))
                * s2.powi(-((n - l) as i32));
            sum += h1[k as usize] * h2[l as usize] * w * mom[(pow / 2) as usize];
        }
    }

    let cm = (2.0f64.powi(m as i32) * fact(m) * PI.sqrt()).powf(-0.5);
    let cn = (2.0f64.powi(n as i32) * fact(n) * PI.sqrt()).powf(-0.5);
    (s1 * s2).powf(-0.5) * cm * cn * d.exp() * sum
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    component: usize,
    n: u32,
    sigma: f64,
    shift: f64,
    re: f64,
    im: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    modulation: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl Serialize for TestFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let records: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|t| TermRecord {
                component: t.component,
                n: t.order,
                sigma: t.scale,
                shift: t.shift,
                re: t.coeff.re,
                im: t.coeff.im,
                modulation: t.modulation,
            })
            .collect();
        records.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TestFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let records = Vec::<TermRecord>::deserialize(deserializer)?;
        let mut terms = Vec::with_capacity(records.len());
        let mut d = 1;
        for r in &records {
            if r.sigma <= 0.0 {
                return Err(D::Error::custom("sigma must be positive"));
            }
            d = d.max(r.component + 1);
            terms.push(Term {
                component: r.component,
                order: r.n,
                scale: r.sigma,
                shift: r.shift,
                modulation: r.modulation,
                coeff: Complex64::new(r.re, r.im),
            });
        }
        Ok(TestFunction {
            component_count: d,
            terms,
        })
    }
}

/// Random real-coefficient function for property tests and verification
/// sweeps. Orders, scales, and shifts stay in ranges where the closed-form
/// integrals are far from any floating-point trouble.
pub fn random_function<R: rand::Rng + ?Sized>(
    rng: &mut R,
    component_count: usize,
    max_terms: usize,
    real: bool,
) -> TestFunction {
    let nterms = rng.random_range(1..=max_terms);
    let mut f = TestFunction::zero(component_count);
    for _ in 0..nterms {
        let order = rng.random_range(0..5u32);
        let scale = rng.random_range(0.5..1.8);
        let shift = rng.random_range(-1.5..1.5);
        let re = rng.random_range(-1.0..1.0);
        let im = if real { 0.0 } else { rng.random_range(-1.0..1.0) };
        let component = rng.random_range(0..component_count);
        let mut g = TestFunction::hermite(order, scale, shift, component)
            .with_component_count(component_count)
            .scale(Complex64::new(re, im));
        if !real && rng.random_bool(0.3) {
            g.terms[0].modulation = rng.random_range(-2.0..2.0);
        }
        f = f.add(&g);
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn h(n: u32) -> TestFunction {
        TestFunction::hermite(n, 1.0, 0.0, 0)
    }

    #[test]
    fn hermite_basics() {
        let h0 = h(0);
        let at0 = h0.evaluate(0, 0.0);
        assert!((at0.re - PI.powf(-0.25)).abs() < 1e-15);
        assert!((h(1).evaluate(0, 0.0)).norm() < 1e-15);
        assert!((h0.l2_inner(&h0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn orthonormality_and_cross_terms() {
        for m in 0..6u32 {
            for n in 0..6u32 {
                let expect = if m == n { 1.0 } else { 0.0 };
                let v = h(m).l2_inner(&h(n));
                assert!(
                    (v - Complex64::new(expect, 0.0)).norm() < 1e-13,
                    "({m},{n}) -> {v}"
                );
            }
        }
    }

    #[test]
    fn translated_gaussian_overlap() {
        let v = h(0).l2_inner(&h(0).translate(1.0));
        assert!((v.re - (-0.25f64).exp()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);
    }

    #[test]
    fn derivative_norm() {
        let d = h(0).derivative();
        assert!((d.norm_sq() - 0.5).abs() < 1e-14);
        // numerical cross-check of the derivative at a few points
        for &x in &[-1.3, 0.2, 0.9] {
            let eps = 1e-5;
            let num = (h(0).evaluate(0, x + eps) - h(0).evaluate(0, x - eps)) / (2.0 * eps);
            assert!((d.evaluate(0, x) - num).norm() < 1e-9);
        }
    }

    #[test]
    fn derivative_of_modulated_term() {
        let f = TestFunction::modulated_hermite(2, 1.3, 0.4, 0.7, 0);
        let d = f.derivative();
        for &x in &[-0.8, 0.1, 1.7] {
            let eps = 1e-5;
            let num = (f.evaluate(0, x + eps) - f.evaluate(0, x - eps)) / (2.0 * eps);
            assert!((d.evaluate(0, x) - num).norm() < 1e-8);
        }
    }

    #[test]
    fn fourier_eigenfunctions() {
        assert!(h(0).fourier().approx_eq(&h(0), 1e-13));
        let want = h(1).scale(Complex64::new(0.0, -1.0));
        assert!(h(1).fourier().approx_eq(&want, 1e-13));
    }

    #[test]
    fn fourier_against_quadrature() {
        // direct Riemann check of the convention, modulated and shifted term
        let f = TestFunction::modulated_hermite(1, 0.8, 0.5, -0.9, 0);
        let fhat = f.fourier();
        for &p in &[0.0, 0.7, -1.4] {
            let mut riemann = Complex64::new(0.0, 0.0);
            let (lo, hi, n) = (-30.0, 30.0, 24000);
            let dx = (hi - lo) / n as f64;
            for k in 0..n {
                let x = lo + (k as f64 + 0.5) * dx;
                riemann += f.evaluate(0, x) * Complex64::new(0.0, -p * x).exp() * dx;
            }
            riemann /= (2.0 * PI).sqrt();
            assert!(
                (fhat.evaluate(0, p) - riemann).norm() < 1e-9,
                "p={p}: {} vs {riemann}",
                fhat.evaluate(0, p)
            );
        }
    }

    #[test]
    fn plancherel_random() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_function(&mut rng, 2, 4, false);
            let n1 = f.norm_sq();
            let n2 = f.fourier().norm_sq();
            assert!((n1 - n2).abs() <= 1e-12 * (1.0 + n1), "{n1} vs {n2}");
        }
    }

    #[test]
    fn fourier_derivative_intertwining() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..20 {
            let f = random_function(&mut rng, 1, 3, false);
            let lhs = f.derivative().fourier();
            let rhs = f.fourier();
            for _ in 0..5 {
                let p = rng.random_range(-3.0..3.0);
                let want = Complex64::new(0.0, p) * rhs.evaluate(0, p);
                let got = lhs.evaluate(0, p);
                assert!((got - want).norm() <= 1e-10 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn translation_phase() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..20 {
            let f = random_function(&mut rng, 1, 3, false);
            let t = rng.random_range(-2.0..2.0);
            let lhs = f.translate(t).fourier();
            let rhs = f.fourier();
            for _ in 0..5 {
                let p = rng.random_range(-3.0..3.0);
                let want = Complex64::new(0.0, -t * p).exp() * rhs.evaluate(0, p);
                assert!((lhs.evaluate(0, p) - want).norm() <= 1e-10 * (1.0 + want.norm()));
            }
        }
    }

    #[test]
    fn conjugate_on_frequency_side() {
        let mut rng = ChaCha12Rng::seed_from_u64(10);
        for _ in 0..20 {
            let f = random_function(&mut rng, 1, 3, false);
            let lhs = f.conjugate().fourier();
            let rhs = f.fourier();
            let p = rng.random_range(-3.0..3.0);
            let want = rhs.evaluate(0, -p).conj();
            assert!((lhs.evaluate(0, p) - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn fourier_plus_is_opposite_convention() {
        let f = TestFunction::modulated_hermite(2, 1.1, -0.3, 0.6, 0);
        let plus = f.fourier_plus();
        let minus = f.fourier();
        for &p in &[-1.2, 0.4, 2.0] {
            assert!((plus.evaluate(0, p) - minus.evaluate(0, -p)).norm() < 1e-13);
        }
    }

    #[test]
    fn translation_composes() {
        let f = TestFunction::modulated_hermite(1, 0.9, 0.2, 1.1, 0);
        let a = f.translate(0.7).translate(-1.9);
        let b = f.translate(-1.2);
        assert!(a.approx_eq(&b, 1e-13));
        assert!(f.translate(0.0).approx_eq(&f, 1e-15));
    }

    #[test]
    fn conjugate_involution_and_reality() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let f = random_function(&mut rng, 2, 4, false);
        assert!(f.conjugate().conjugate().approx_eq(&f, 1e-14));
        let g = random_function(&mut rng, 2, 4, true);
        assert!(g.real_valued());
        assert!(!TestFunction::modulated_hermite(0, 1.0, 0.0, 1.0, 0).real_valued());
    }

    #[test]
    fn real_valued_sampling_matches_flag() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let f = random_function(&mut rng, 1, 4, true);
        let scale = f.norm();
        for _ in 0..1000 {
            let x = rng.random_range(-8.0..8.0);
            assert!(f.evaluate(0, x).im.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn serde_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let f = random_function(&mut rng, 3, 5, false);
        let json = serde_json::to_string(&f).unwrap();
        let back: TestFunction = serde_json::from_str(&json).unwrap();
        assert_eq!(f.terms.len(), back.terms.len());
        assert!(f.approx_eq(&back, 1e-15));
        assert!(serde_json::from_str::<TestFunction>(
            "[{\"component\":0,\"n\":1,\"sigma\":-1.0,\"shift\":0.0,\"re\":1.0,\"im\":0.0}]"
        )
        .is_err());
    }

    #[test]
    fn component_mismatch_rejected() {
        let f = TestFunction::hermite(0, 1.0, 0.0, 0);
        let g = TestFunction::hermite(0, 1.0, 0.0, 1);
        let r = std::panic::catch_unwind(|| f.l2_inner(&g));
        assert!(r.is_err());
    }

    #[test]
    #[should_panic(expected = "scale must be positive")]
    fn nonpositive_scale_rejected() {
        TestFunction::hermite(0, 0.0, 0.0, 0);
    }

    #[test]
    fn inner_product_with_modulation_against_riemann() {
        let f = TestFunction::modulated_hermite(2, 1.3, 0.4, 0.9, 0);
        let g = TestFunction::modulated_hermite(1, 0.8, -0.3, -0.4, 0);
        let exact = f.l2_inner(&g);
        let mut riemann = Complex64::new(0.0, 0.0);
        let (lo, hi, n) = (-30.0, 30.0, 60000);
        let dx = (hi - lo) / n as f64;
        for k in 0..n {
            let x = lo + (k as f64 + 0.5) * dx;
            riemann += f.evaluate(0, x).conj() * g.evaluate(0, x) * dx;
        }
        assert!((exact - riemann).norm() < 1e-10, "{exact} vs {riemann}");
    }
}
