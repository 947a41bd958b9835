//! Finite-dimensional commutation criterion pipeline: spectral splitting of a
//! perturbed state symbol, the truncation constants, the domination bound on
//! the commutative subalgebra, Fock-space densities for quasi-free
//! functionals, Jordan norms along nested restrictions, and the
//! Powers-Stormer inequality.
//!
//! The antiunitary is carried as conjugation composed with a symmetric
//! unitary `u`, so `gamma(M) = u conj(M) conj(u)` on matrices.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{
    cdot, hermitian_eigen, hermitian_function, hermitian_function_c, kron, pfaffian,
    trace_norm_hermitian, trace_norm_singular, CMat, CVec,
};
use crate::testfn::TestFunction;
use crate::Measured;

mod matjson {
    use super::*;
    use serde::de::Error;

    pub fn serialize<S: serde::Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.rows)
            .map(|i| (0..m.cols).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        serde::Serialize::serialize(&rows, s)
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = serde::Deserialize::deserialize(d)?;
        let nr = rows.len();
        let nc = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != nc) {
            return Err(D::Error::custom("ragged matrix"));
        }
        Ok(CMat::from_fn(nr, nc, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}

/// Self-dual CAR data: antiunitary part, state part, perturbation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CarInstance {
    #[serde(with = "matjson")]
    pub u: CMat,
    #[serde(with = "matjson")]
    pub r: CMat,
    #[serde(with = "matjson")]
    pub t: CMat,
}

impl CarInstance {
    pub fn dim(&self) -> usize {
        self.r.rows
    }

    /// Conjugation by the antiunitary: u conj(M) conj(u).
    pub fn gamma_conj(&self, m: &CMat) -> CMat {
        self.u.mul(&m.conj()).mul(&self.u.conj())
    }

    pub fn gamma_vec(&self, v: &[Complex64]) -> CVec {
        let cv: CVec = v.iter().map(|z| z.conj()).collect();
        self.u.matvec(&cv)
    }

    pub fn s(&self) -> CMat {
        self.r.add(&self.t)
    }

    pub fn validate(&self) -> Result<(), String> {
        let n = self.dim();
        if n == 0 || n % 2 == 1 || self.u.rows != n || self.t.rows != n {
            return Err(String::from("dimension must be even and shared"));
        }
        let uu = self.u.mul(&self.u.adjoint());
        if uu.sub(&CMat::identity(n)).max_abs() > 1e-12 {
            return Err(String::from("antiunitary part not unitary"));
        }
        if self.u.mul(&self.u.conj()).sub(&CMat::identity(n)).max_abs() > 1e-12 {
            return Err(String::from("antiunitary does not square to one"));
        }
        if self.r.hermiticity_residual() > 1e-12 || self.t.hermiticity_residual() > 1e-12 {
            return Err(String::from("r and t must be hermitian"));
        }
        let (vals, _) = hermitian_eigen(&self.r);
        if vals.iter().any(|&v| !(-1e-10..=1.0 + 1e-10).contains(&v)) {
            return Err(String::from("r outside [0, 1]"));
        }
        let res_r = self
            .r
            .add(&self.gamma_conj(&self.r))
            .sub(&CMat::identity(n))
            .max_abs();
        if res_r > 1e-12 {
            return Err(format!("r + gamma r gamma != 1 (residual {res_r:.2e})"));
        }
        let res_t = self.t.add(&self.gamma_conj(&self.t)).max_abs();
        if res_t > 1e-12 {
            return Err(format!("t + gamma t gamma != 0 (residual {res_t:.2e})"));
        }
        Ok(())
    }
}

/// Mode-pair swap: e_k <-> e_{k+m}.
pub fn swap_matrix(m: usize) -> CMat {
    CMat::from_fn(2 * m, 2 * m, |i, j| {
        let hit = j == (i + m) % (2 * m);
        Complex64::new(if hit { 1.0 } else { 0.0 }, 0.0)
    })
}

fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize, scale: f64) -> CMat {
    let a = CMat::from_fn(n, n, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    a.add(&a.adjoint()).scale(Complex64::new(0.5 * scale, 0.0))
}

/// Random instance on m mode pairs with the swap antiunitary.
///
/// The state part conjugates diag(r, 1-r) by a compatible unitary; the
/// perturbation is antisymmetrized and clipped to trace norm 2 so that the
/// truncation constant stays moderate.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, m: usize) -> CarInstance {
    let n = 2 * m;
    let j = swap_matrix(m);
    let gamma = |x: &CMat| j.mul(&x.conj()).mul(&j.conj());

    let a = random_hermitian(rng, n, 1.0);
    let h = a.sub(&gamma(&a)).scale(Complex64::new(0.5, 0.0));
    let v = hermitian_function_c(&h, |x| Complex64::new(0.0, x).exp());

    let mut d = alloc::vec![0.0; n];
    for k in 0..m {
        let r = rng.random_range(0.08..0.92);
        d[k] = r;
        d[k + m] = 1.0 - r;
    }
    let r0 = v.mul(&CMat::diag_real(&d)).mul(&v.adjoint());
    let r = r0.add(&r0.adjoint()).scale(Complex64::new(0.5, 0.0));

    let b = random_hermitian(rng, n, 0.6);
    let t0 = b.sub(&gamma(&b)).scale(Complex64::new(0.5, 0.0));
    let tn = trace_norm_hermitian(&t0);
    let t = if tn > 2.0 {
        t0.scale(Complex64::new(2.0 / tn, 0.0))
    } else {
        t0
    };

    let inst = CarInstance { u: j, r, t };
    inst.validate().expect("generated instance invalid");
    inst
}

/// The 2-dim worked instance.
pub fn hand_instance() -> CarInstance {
    CarInstance {
        u: swap_matrix(1),
        r: CMat::diag_real(&[0.9, 0.1]),
        t: CMat::diag_real(&[0.3, -0.3]),
    }
}

#[derive(Clone, Debug)]
pub struct SplitMode {
    pub lambda: f64,
    pub e: CVec,
    pub ge: CVec,
}

/// Spectral decomposition of S = R + T at the thresholds 0 and 1, with the
/// truncated symbols and the domination constant.
#[derive(Clone, Debug)]
pub struct SpectralSplit {
    pub s: CMat,
    pub p0: CMat,
    pub p1: CMat,
    pub p2: CMat,
    pub s0: CMat,
    pub s1: CMat,
    pub s2: CMat,
    pub x: CMat,
    pub y: CMat,
    pub y_prime: CMat,
    pub modes: Vec<SplitMode>,
    pub c_plus: f64,
    pub c_minus: f64,
    pub c: f64,
    pub warnings: Vec<String>,
}

fn projector(vecs: &[&CVec], n: usize) -> CMat {
    let mut p = CMat::zeros(n, n);
    for v in vecs {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
    p
}

/// Split the symbol at the spectral thresholds; boundary ties within
/// `spectral_tol` go to the middle block and are recorded as warnings.
pub fn spectral_split(inst: &CarInstance, spectral_tol: f64) -> SpectralSplit {
    inst.validate().expect("invalid instance");
    let n = inst.dim();
    let s = inst.s();
    let (vals, vecs) = hermitian_eigen(&s);
    let mut warnings = Vec::new();
    let mut class = alloc::vec![1usize; n];
    for (k, &v) in vals.iter().enumerate() {
        if v.abs() <= spectral_tol || (v - 1.0).abs() <= spectral_tol {
            warnings.push(format!(
                "degenerate split: eigenvalue {v:.3e} within {spectral_tol:.1e} of a threshold, assigned to the middle block"
            ));
            class[k] = 1;
        } else if v < 0.0 {
            class[k] = 0;
        } else if v > 1.0 {
            class[k] = 2;
        }
    }
    let cols: Vec<CVec> = (0..n).map(|k| vecs.column(k)).collect();
    let by_class = |c: usize| -> Vec<&CVec> {
        (0..n).filter(|&k| class[k] == c).map(|k| &cols[k]).collect()
    };
    let p0 = projector(&by_class(0), n);
    let p1 = projector(&by_class(1), n);
    let p2 = projector(&by_class(2), n);
    let s0 = p0.mul(&s).mul(&p0);
    let s1 = p1.mul(&s).mul(&p1);
    let s2 = p2.mul(&s).mul(&p2);
    let x = s1.add(&p2);
    let y = s0.add(&s2).sub(&p2);
    let y_prime = hermitian_function(&y, |t| t.clamp(-0.5, 0.5));

    let modes: Vec<SplitMode> = (0..n)
        .filter(|&k| class[k] == 2)
        .map(|k| SplitMode {
            lambda: vals[k] - 1.0,
            e: cols[k].clone(),
            ge: inst.gamma_vec(&cols[k]),
        })
        .collect();

    let c_plus: f64 = modes
        .iter()
        .filter(|m| m.lambda >= 0.5)
        .map(|m| (1.0 + m.lambda) * (1.0 + m.lambda))
        .product();
    let c_minus: f64 = modes
        .iter()
        .filter(|m| m.lambda >= 0.5)
        .map(|_| 4.0)
        .product();
    let c = (2.0 * trace_norm_hermitian(&y)).exp() * c_plus * c_minus;

    let tol = 1e-10;
    let idm = CMat::identity(n);
    assert!(
        inst.gamma_conj(&p0).sub(&p2).max_abs() <= tol,
        "gamma p0 gamma != p2"
    );
    assert!(
        inst.gamma_conj(&p1).sub(&p1).max_abs() <= tol,
        "gamma p1 gamma != p1"
    );
    let (xe, _) = hermitian_eigen(&x);
    assert!(
        xe.iter().all(|&v| (-tol..=1.0 + tol).contains(&v)),
        "x outside [0, 1]"
    );
    assert!(
        inst.gamma_conj(&x).sub(&idm.sub(&x)).max_abs() <= tol,
        "gamma x gamma != 1 - x"
    );
    assert!(
        inst.gamma_conj(&y).add(&y).max_abs() <= tol,
        "gamma y gamma != -y"
    );

    SpectralSplit {
        s,
        p0,
        p1,
        p2,
        s0,
        s1,
        s2,
        x,
        y,
        y_prime,
        modes,
        c_plus,
        c_minus,
        c,
        warnings,
    }
}

/// Worst |phi_{X+Y}(a)| / (c phi_{X-Y'}(a)) over monomials in the commuting
/// mode projections. Exhaustive when feasible, otherwise sampled.
pub fn domination_check(split: &SpectralSplit) -> f64 {
    let lam: Vec<f64> = split.modes.iter().map(|m| m.lambda).collect();
    let k = lam.len();
    let c = split.c;
    let ratio = |mask2: u64, mask0: u64| -> f64 {
        let mut lhs = 1.0f64;
        let mut rhs = 1.0f64;
        for (j, &l) in lam.iter().enumerate() {
            if mask0 >> j & 1 == 1 {
                lhs *= l;
                rhs *= l.min(0.5);
            }
            if mask2 >> j & 1 == 1 {
                lhs *= 1.0 + l;
                rhs *= 1.0 - l.min(0.5);
            }
        }
        if rhs == 0.0 {
            return if lhs == 0.0 { 0.0 } else { f64::INFINITY };
        }
        lhs / (c * rhs)
    };
    let mut worst = 0.0f64;
    if k <= 6 {
        for mask2 in 0..(1u64 << k) {
            for mask0 in 0..(1u64 << k) {
                worst = worst.max(ratio(mask2, mask0));
            }
        }
    } else {
        let mut rng = ChaCha12Rng::seed_from_u64(0x0dd5);
        for _ in 0..10_000 {
            let mask2 = rng.random_range(0..(1u64 << k));
            let mask0 = rng.random_range(0..(1u64 << k));
            worst = worst.max(ratio(mask2, mask0));
        }
    }
    worst
}

/// Orthonormal basis fixed pointwise by the antiunitary.
pub fn gamma_real_basis(u: &CMat) -> CMat {
    let n = u.rows;
    let gamma = |v: &CVec| -> CVec {
        let cv: CVec = v.iter().map(|z| z.conj()).collect();
        u.matvec(&cv)
    };
    let mut cols: Vec<CVec> = Vec::with_capacity(n);
    'fill: for j in 0..n {
        for phase in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            if cols.len() == n {
                break 'fill;
            }
            let mut cand: CVec = alloc::vec![Complex64::new(0.0, 0.0); n];
            cand[j] = phase;
            let g = gamma(&cand);
            let mut v: CVec = cand.iter().zip(&g).map(|(a, b)| a + b).collect();
            for h in &cols {
                let c = cdot(h, &v);
                for (vi, hi) in v.iter_mut().zip(h) {
                    *vi -= c * hi;
                }
            }
            let norm = crate::linalg::vec_norm(&v);
            if norm > 1e-6 {
                for vi in v.iter_mut() {
                    *vi /= norm;
                }
                cols.push(v);
            }
        }
    }
    assert_eq!(cols.len(), n, "gamma-real basis construction failed");
    let mut out = CMat::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}

/// Jordan-Wigner majorana matrices c_0 .. c_{2m-1} on the 2^m-dim space,
/// with {c_a, c_b} = 2 delta exactly.
pub fn majorana_matrices(m: usize) -> Vec<CMat> {
    let id = CMat::identity(2);
    let sx = CMat::from_fn(2, 2, |i, j| {
        Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0)
    });
    let sy = CMat::from_fn(2, 2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(0.0, -1.0),
        (1, 0) => Complex64::new(0.0, 1.0),
        _ => Complex64::new(0.0, 0.0),
    });
    let sz = CMat::diag_real(&[1.0, -1.0]);
    let mut out = Vec::with_capacity(2 * m);
    for k in 0..m {
        for local in [&sx, &sy] {
            let mut acc = CMat::identity(1);
            for pos in 0..m {
                let factor = if pos < k {
                    &sz
                } else if pos == k {
                    local
                } else {
                    &id
                };
                acc = kron(&acc, factor);
            }
            out.push(acc);
        }
    }
    out
}

/// Density operator reproducing a quasi-free functional on the Fock space.
#[derive(Clone, Debug)]
pub struct FockBuild {
    pub rho: CMat,
    pub residual: f64,
}

struct FockWalker<'a> {
    cs: &'a [CMat],
    pair: &'a CMat,
    rho: CMat,
    norm: f64,
}

impl FockWalker<'_> {
    fn phi(&self, subset: &[usize]) -> Complex64 {
        let k = subset.len();
        if k % 2 == 1 {
            return Complex64::new(0.0, 0.0);
        }
        let m = CMat::from_fn(k, k, |u, v| {
            use core::cmp::Ordering;
            match u.cmp(&v) {
                Ordering::Less => self.pair[(subset[u], subset[v])],
                Ordering::Greater => -self.pair[(subset[v], subset[u])],
                Ordering::Equal => Complex64::new(0.0, 0.0),
            }
        });
        pfaffian(&m)
    }

    fn walk(&mut self, start: usize, subset: &mut Vec<usize>, prod: &CMat) {
        let value = self.phi(subset);
        if value.norm() > 0.0 {
            let adj = prod.adjoint();
            let w = value * self.norm;
            for i in 0..self.rho.rows {
                for j in 0..self.rho.cols {
                    self.rho[(i, j)] += w * adj[(i, j)];
                }
            }
        }
        for next in start..self.cs.len() {
            subset.push(next);
            let p = prod.mul(&self.cs[next]);
            self.walk(next + 1, subset, &p);
            subset.pop();
        }
    }
}

/// Build the density matrix for the quasi-free functional with the given
/// symbol: phi(B(f)* B(g)) = <f, symbol g>, B(f)* = B(gamma f).
///
/// Expands rho over the orthogonal majorana-monomial basis; the returned
/// residual is the worst reproduction error over a spot-check family.
pub fn fock_functional(symbol: &CMat, u: &CMat, m: usize) -> FockBuild {
    assert!(m <= 10, "fock space capped at 10 mode pairs");
    let n = 2 * m;
    assert_eq!(symbol.rows, n);
    let hb = gamma_real_basis(u);
    let st = hb.adjoint().mul(symbol).mul(&hb);
    // 2-pt values of majorana pairs; off-diagonal is purely imaginary
    let pair = st.scale(Complex64::new(2.0, 0.0));
    let cs = majorana_matrices(m);
    let dim = 1usize << m;
    let mut walker = FockWalker {
        cs: &cs,
        pair: &pair,
        rho: CMat::zeros(dim, dim),
        norm: 1.0 / dim as f64,
    };
    let mut subset = Vec::new();
    walker.walk(0, &mut subset, &CMat::identity(dim));
    let rho = walker.rho;

    let mut residual = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
    for i in 0..n {
        for j in (i + 1)..n {
            let got = rho.mul(&cs[i].mul(&cs[j])).trace();
            residual = residual.max((got - pair[(i, j)]).norm());
        }
    }
    FockBuild { rho, residual }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JordanLevel {
    pub dim: usize,
    pub total: f64,
    pub positive: f64,
    pub negative: f64,
    pub trace: f64,
}

fn compress(mat: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(idx.len(), idx.len(), |i, j| mat[(idx[i], idx[j])])
}

/// Jordan norms of the functional restricted to nested mode-pair subspaces.
///
/// Each level keeps the first d/2 mode pairs; the compressed symbol is the
/// exact restriction of the functional. Norms come from the eigenvalues of
/// the representing density; totals are cross-checked against singular
/// values.
pub fn jordan_norms(inst: &CarInstance, sub_dims: &[usize]) -> Vec<JordanLevel> {
    let m = inst.dim() / 2;
    let s = inst.s();
    let mut out = Vec::with_capacity(sub_dims.len());
    let mut prev = 0;
    for &d in sub_dims {
        assert!(d % 2 == 0 && d > prev && d <= inst.dim(), "sub_dims must be even, increasing, within dim");
        prev = d;
        let k = d / 2;
        let idx: Vec<usize> = (0..k).chain(m..m + k).collect();
        let sk = compress(&s, &idx);
        let uk = compress(&inst.u, &idx);
        assert!(
            uk.mul(&uk.conj()).sub(&CMat::identity(d)).max_abs() <= 1e-12,
            "restriction does not respect the antiunitary"
        );
        let build = fock_functional(&sk, &uk, k);
        assert!(build.residual <= 1e-9, "fock solve residual {}", build.residual);
        let (vals, _) = hermitian_eigen(&build.rho);
        let positive: f64 = vals.iter().map(|v| v.max(0.0)).sum();
        let negative: f64 = vals.iter().map(|v| (-v).max(0.0)).sum();
        let total = positive + negative;
        let singular = trace_norm_singular(&build.rho);
        assert!(
            (total - singular).abs() <= 1e-8,
            "trace norm mismatch: jordan {total} vs singular {singular}"
        );
        out.push(JordanLevel {
            dim: d,
            total,
            positive,
            negative,
            trace: build.rho.trace().re,
        });
    }
    out
}

/// Worst slack of ||x^(1/2) - y^(1/2)||_2^2 <= ||x - y||_1 over random PSD
/// pairs.
pub fn powers_stormer_check(n: usize, trials: usize, seed: u64) -> f64 {
    assert!(n <= 64, "dimension capped at 64");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let a = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let b = CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let x = a.mul(&a.adjoint()).scale(Complex64::new(1.0 / n as f64, 0.0));
        let y = b.mul(&b.adjoint()).scale(Complex64::new(1.0 / n as f64, 0.0));
        let slack = powers_stormer_slack(&x, &y);
        worst = worst.min(slack);
    }
    assert!(worst >= -1e-10, "inequality violated: slack {worst}");
    worst
}

/// RHS minus LHS of the inequality for one PSD pair.
pub fn powers_stormer_slack(x: &CMat, y: &CMat) -> f64 {
    let xs = hermitian_function(x, |t| t.max(0.0).sqrt());
    let ys = hermitian_function(y, |t| t.max(0.0).sqrt());
    let lhs = xs.sub(&ys).frobenius().powi(2);
    let rhs = trace_norm_hermitian(&x.sub(y));
    rhs - lhs
}

/// Two-point functional backed by a bilinear pair matrix in coordinates.
///
/// Arguments are coordinate vectors encoded as sums of unit-scale hermite
/// labels; entry (i, j) is the value on the (i, j) generator pair.
pub struct MatrixFunctional {
    pub pair: CMat,
}

/// Encode a coordinate vector as a test-function label.
pub fn coord_function(coords: &[Complex64]) -> TestFunction {
    let mut f = TestFunction::zero(1);
    for (j, &c) in coords.iter().enumerate() {
        if c != Complex64::new(0.0, 0.0) {
            f = f.add(&TestFunction::hermite(j as u32, 1.0, 0.0, 0).scale(c));
        }
    }
    f
}

fn to_coords(f: &TestFunction, n: usize) -> CVec {
    let mut out = alloc::vec![Complex64::new(0.0, 0.0); n];
    for t in &f.terms {
        assert!(
            t.scale == 1.0 && t.shift == 0.0 && t.modulation == 0.0 && t.component == 0,
            "coordinate labels must be plain hermite units"
        );
        out[t.order as usize] += t.coeff;
    }
    out
}

impl crate::car::TwoPoint for MatrixFunctional {
    fn fermi_2pt(&self, f: &TestFunction, g: &TestFunction) -> Measured {
        let a = to_coords(f, self.pair.rows);
        let b = to_coords(g, self.pair.rows);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.pair.rows {
            for j in 0..self.pair.cols {
                acc += a[i].conj() * self.pair[(i, j)] * b[j];
            }
        }
        Measured::exact(acc)
    }

    fn bose_2pt(&self, _f: &TestFunction, _g: &TestFunction) -> Measured {
        panic!("matrix functional is fermionic only");
    }
}
