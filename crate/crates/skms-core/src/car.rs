//! Symbolic graded *-algebra of words in field generators, with quasi-free
//! evaluation.
//!
//! Words are formal products of fermionic generators F(f) and bosonic current
//! generators J(f) with a complex coefficient. No operator representation is
//! built here: a quasi-free functional is determined by its two-point data,
//! and word values come from pairing expansions (signed for fermions, plain
//! for bosons, product across the two sectors).
//!
//! The two-point callbacks are hermitian sesquilinear forms. A pair value of
//! generators with arguments (u, v) is the bilinear extension
//! `callback(conj(u), v)`, which is what makes the CAR contraction
//! F(f)*F(g) + F(g)F(f)* = <f,g> come out right for complex arguments.

use crate::kernel::{self, KernelConfig};
use crate::linalg::{self, CMat};
use crate::testfn::TestFunction;
use crate::Measured;
use alloc::vec::Vec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Longest word the pairing evaluators accept.
pub const MAX_WORD_LEN: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Species {
    #[serde(rename = "F")]
    Fermion,
    #[serde(rename = "J")]
    Boson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Generator {
    pub species: Species,
    pub argument: TestFunction,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub starred: bool,
}

impl Generator {
    pub fn fermion(argument: TestFunction) -> Self {
        Generator {
            species: Species::Fermion,
            argument,
            starred: false,
        }
    }

    pub fn boson(argument: TestFunction) -> Self {
        Generator {
            species: Species::Boson,
            argument,
            starred: false,
        }
    }

    pub fn star(mut self) -> Self {
        self.starred = !self.starred;
        self
    }

    fn resolve_star(&self) -> Generator {
        if self.starred {
            Generator {
                species: self.species,
                argument: self.argument.conjugate(),
                starred: false,
            }
        } else {
            self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Word {
    pub coefficient: Complex64,
    pub factors: Vec<Generator>,
}

impl Word {
    pub fn unit() -> Self {
        Word {
            coefficient: Complex64::new(1.0, 0.0),
            factors: Vec::new(),
        }
    }

    pub fn from_factors(factors: Vec<Generator>) -> Self {
        Word {
            coefficient: Complex64::new(1.0, 0.0),
            factors,
        }
    }

    pub fn scale(&self, c: Complex64) -> Word {
        Word {
            coefficient: self.coefficient * c,
            factors: self.factors.clone(),
        }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(&other.factors);
        Word {
            coefficient: self.coefficient * other.coefficient,
            factors,
        }
    }

    pub fn fermion_count(&self) -> usize {
        self.factors
            .iter()
            .filter(|g| g.species == Species::Fermion)
            .count()
    }

    pub fn boson_count(&self) -> usize {
        self.factors.len() - self.fermion_count()
    }

    pub fn is_odd(&self) -> bool {
        self.fermion_count() % 2 == 1
    }

    /// Grading automorphism: fermionic generators flip sign.
    pub fn gamma(&self) -> Word {
        let sign = if self.is_odd() { -1.0 } else { 1.0 };
        Word {
            coefficient: self.coefficient * sign,
            factors: self.factors.clone(),
        }
    }

    /// The *-operation: reverse, star each factor, conjugate the coefficient.
    pub fn adjoint(&self) -> Word {
        let factors = self.factors.iter().rev().map(|g| g.clone().star()).collect();
        Word {
            coefficient: self.coefficient.conj(),
            factors,
        }
    }

    /// Resolve stars through argument conjugation; no starred factors remain.
    pub fn normalize(&self) -> Word {
        Word {
            coefficient: self.coefficient,
            factors: self.factors.iter().map(|g| g.resolve_star()).collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        self.factors.iter().all(|g| !g.starred)
    }

    /// Translate every argument by t (the time evolution on words).
    pub fn translate_all(&self, t: f64) -> Word {
        self.map_args(|f| f.translate(t))
    }

    pub fn map_args(&self, op: impl Fn(&TestFunction) -> TestFunction) -> Word {
        let factors = self
            .factors
            .iter()
            .map(|g| Generator {
                species: g.species,
                argument: op(&g.argument),
                starred: g.starred,
            })
            .collect();
        Word {
            coefficient: self.coefficient,
            factors,
        }
    }

    /// Structural comparison after normalization, argument-wise in L2.
    pub fn approx_eq(&self, other: &Word, tol: f64) -> bool {
        let a = self.normalize();
        let b = other.normalize();
        if a.factors.len() != b.factors.len() {
            return false;
        }
        if (a.coefficient - b.coefficient).norm() > tol * (1.0 + a.coefficient.norm()) {
            return false;
        }
        a.factors.iter().zip(b.factors.iter()).all(|(x, y)| {
            x.species == y.species && x.argument.approx_eq(&y.argument, tol)
        })
    }

}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Record<'a> {
            re: f64,
            im: f64,
            factors: &'a [Generator],
        }
        Record {
            re: self.coefficient.re,
            im: self.coefficient.im,
            factors: &self.factors,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Record {
            re: f64,
            im: f64,
            factors: Vec<Generator>,
        }
        let r = Record::deserialize(deserializer)?;
        Ok(Word {
            coefficient: Complex64::new(r.re, r.im),
            factors: r.factors,
        })
    }
}

/// Two-point data of a quasi-free functional. Both callbacks are hermitian
/// forms; cross pairings between the sectors vanish identically.
pub trait TwoPoint {
    fn fermi_2pt(&self, f: &TestFunction, g: &TestFunction) -> Measured;
    fn bose_2pt(&self, f: &TestFunction, g: &TestFunction) -> Measured;
}

/// The canonical functional: thermal kernel for fermions, current two-point
/// function for bosons.
pub struct KernelFunctional {
    pub cfg: KernelConfig,
}

impl KernelFunctional {
    pub fn new(cfg: KernelConfig) -> Self {
        KernelFunctional { cfg }
    }
}

impl Default for KernelFunctional {
    fn default() -> Self {
        KernelFunctional {
            cfg: KernelConfig::default(),
        }
    }
}

impl TwoPoint for KernelFunctional {
    fn fermi_2pt(&self, f: &TestFunction, g: &TestFunction) -> Measured {
        kernel::theta(f, g, &self.cfg).expect("thermal kernel quadrature failed")
    }

    fn bose_2pt(&self, f: &TestFunction, g: &TestFunction) -> Measured {
        kernel::bosonic_2pt(f, g, &self.cfg).expect("bosonic kernel quadrature failed")
    }
}

/// Signed pairing sum over perfect matchings of {0..n-1}:
/// pair the first index with each j, sign alternating, recurse on the rest.
pub fn pairing_sum_signed(n: usize, pair: &mut dyn FnMut(usize, usize) -> Measured) -> Measured {
    fn rec(idx: &[usize], pair: &mut dyn FnMut(usize, usize) -> Measured) -> Measured {
        if idx.is_empty() {
            return Measured::exact(Complex64::new(1.0, 0.0));
        }
        let first = idx[0];
        let mut acc = Measured::exact(Complex64::new(0.0, 0.0));
        for (pos, &j) in idx[1..].iter().enumerate() {
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&k| k != j).collect();
            let term = pair(first, j).mul(rec(&rest, pair)).scale(Complex64::new(sign, 0.0));
            acc = acc.add(term);
        }
        acc
    }
    if n % 2 == 1 {
        return Measured::exact(Complex64::new(0.0, 0.0));
    }
    let idx: Vec<usize> = (0..n).collect();
    rec(&idx, pair)
}

/// Unsigned pairing sum (the bosonic expansion).
pub fn pairing_sum_unsigned(n: usize, pair: &mut dyn FnMut(usize, usize) -> Measured) -> Measured {
    fn rec(idx: &[usize], pair: &mut dyn FnMut(usize, usize) -> Measured) -> Measured {
        if idx.is_empty() {
            return Measured::exact(Complex64::new(1.0, 0.0));
        }
        let first = idx[0];
        let mut acc = Measured::exact(Complex64::new(0.0, 0.0));
        for &j in &idx[1..] {
            let rest: Vec<usize> = idx[1..].iter().copied().filter(|&k| k != j).collect();
            acc = acc.add(pair(first, j).mul(rec(&rest, pair)));
        }
        acc
    }
    if n % 2 == 1 {
        return Measured::exact(Complex64::new(0.0, 0.0));
    }
    let idx: Vec<usize> = (0..n).collect();
    rec(&idx, pair)
}

/// The same signed sum as the Pfaffian of the antisymmetrized pair matrix.
///
/// First-order error estimate via Pfaffian minors (the derivative of Pf with
/// respect to one entry is the complementary minor up to sign).
pub fn pairing_pfaffian(n: usize, pair: &mut dyn FnMut(usize, usize) -> Measured) -> Measured {
    if n % 2 == 1 {
        return Measured::exact(Complex64::new(0.0, 0.0));
    }
    if n == 0 {
        return Measured::exact(Complex64::new(1.0, 0.0));
    }
    let mut a = CMat::zeros(n, n);
    let mut errs = alloc::vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let m = pair(i, j);
            a[(i, j)] = m.value;
            a[(j, i)] = -m.value;
            errs[i * n + j] = m.err;
        }
    }
    let value = linalg::pfaffian(&a);
    let mut err = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if errs[i * n + j] == 0.0 {
                continue;
            }
            let keep: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
            let minor = CMat::from_fn(n - 2, n - 2, |r, s| a[(keep[r], keep[s])]);
            err += errs[i * n + j] * linalg::pfaffian(&minor).norm();
        }
    }
    Measured::new(value, err)
}

/// Random normalized word: complex-valued fermionic arguments, real-valued
/// bosonic ones (the current symbols take real arguments in every suite),
/// species interleaved.
pub fn random_word<R: rand::Rng + ?Sized>(rng: &mut R, fermions: usize, bosons: usize) -> Word {
    let mut factors = Vec::with_capacity(fermions + bosons);
    for _ in 0..fermions {
        factors.push(Generator::fermion(crate::testfn::random_function(
            rng, 1, 2, false,
        )));
    }
    for _ in 0..bosons {
        factors.push(Generator::boson(crate::testfn::random_function(
            rng, 1, 2, true,
        )));
    }
    // Fisher-Yates
    for i in (1..factors.len()).rev() {
        let j = rng.random_range(0..=i);
        factors.swap(i, j);
    }
    Word::from_factors(factors)
}

fn fermi_pair(phi: &dyn TwoPoint, u: &TestFunction, v: &TestFunction) -> Measured {
    phi.fermi_2pt(&u.conjugate(), v)
}

fn bose_pair(phi: &dyn TwoPoint, u: &TestFunction, v: &TestFunction) -> Measured {
    phi.bose_2pt(&u.conjugate(), v)
}

fn fermi_args(w: &Word) -> Vec<&TestFunction> {
    w.factors
        .iter()
        .filter(|g| g.species == Species::Fermion)
        .map(|g| &g.argument)
        .collect()
}

fn bose_args(w: &Word) -> Vec<&TestFunction> {
    w.factors
        .iter()
        .filter(|g| g.species == Species::Boson)
        .map(|g| &g.argument)
        .collect()
}

fn check_word(w: &Word) {
    assert!(w.is_normalized(), "evaluate normalized words only");
    assert!(
        w.factors.len() <= MAX_WORD_LEN,
        "word length {} exceeds cap {MAX_WORD_LEN}",
        w.factors.len()
    );
}

/// Recursive quasi-free value of a purely fermionic word.
pub fn quasifree_eval_recursive(phi: &dyn TwoPoint, w: &Word) -> Measured {
    check_word(w);
    assert!(w.boson_count() == 0, "fermionic words only");
    let args = fermi_args(w);
    pairing_sum_signed(args.len(), &mut |i, j| fermi_pair(phi, args[i], args[j]))
        .scale(w.coefficient)
}

/// Same value through the Pfaffian of the pair matrix.
pub fn quasifree_eval_pfaffian(phi: &dyn TwoPoint, w: &Word) -> Measured {
    check_word(w);
    assert!(w.boson_count() == 0, "fermionic words only");
    let args = fermi_args(w);
    pairing_pfaffian(args.len(), &mut |i, j| fermi_pair(phi, args[i], args[j]))
        .scale(w.coefficient)
}

/// Value of a mixed word under the product functional: bosonic factors are
/// collected in order (they carry no grading sign), each sector is expanded
/// by its pairing sum, and the two sector values multiply.
pub fn mixed_eval(phi: &dyn TwoPoint, w: &Word) -> Measured {
    check_word(w);
    let fa = fermi_args(w);
    let ba = bose_args(w);
    if fa.len() % 2 == 1 || ba.len() % 2 == 1 {
        return Measured::exact(Complex64::new(0.0, 0.0));
    }
    let fermi = if fa.len() > 8 {
        pairing_pfaffian(fa.len(), &mut |i, j| fermi_pair(phi, fa[i], fa[j]))
    } else {
        pairing_sum_signed(fa.len(), &mut |i, j| fermi_pair(phi, fa[i], fa[j]))
    };
    let bose = pairing_sum_unsigned(ba.len(), &mut |i, j| bose_pair(phi, ba[i], ba[j]));
    fermi.mul(bose).scale(w.coefficient)
}
