//! Graded derivation on CAR/commutation words.
//!
//! `delta` sends a smeared fermion to the matching boson symbol and a boson
//! back to a fermion with differentiated argument (times `i`), extended to
//! products by the graded Leibniz rule. Its square acts as `i` times the
//! generator of translations, which is what the dynamical checks below probe
//! numerically.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::car::{mixed_eval, Generator, Species, TwoPoint, Word};
use crate::Measured;

/// Finite formal sum of words.
#[derive(Clone, Debug, Default, serde::Serialize, serde::Deserialize)]
pub struct WordSum {
    pub words: Vec<Word>,
}

impl WordSum {
    pub fn zero() -> Self {
        WordSum { words: Vec::new() }
    }

    pub fn from_word(w: Word) -> Self {
        WordSum {
            words: alloc::vec![w],
        }
    }

    pub fn add(mut self, other: WordSum) -> Self {
        self.words.extend(other.words);
        self
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        for w in &mut self.words {
            w.coefficient *= c;
        }
        self
    }

    /// Sandwich every word as `x * w * z`.
    pub fn sandwich(&self, x: &Word, z: &Word) -> WordSum {
        WordSum {
            words: self.words.iter().map(|w| x.mul(w).mul(z)).collect(),
        }
    }

    pub fn gamma(&self) -> WordSum {
        WordSum {
            words: self.words.iter().map(Word::gamma).collect(),
        }
    }

    pub fn adjoint(&self) -> WordSum {
        WordSum {
            words: self.words.iter().map(|w| w.adjoint().normalize()).collect(),
        }
    }

    pub fn translate_all(&self, t: f64) -> WordSum {
        WordSum {
            words: self.words.iter().map(|w| w.translate_all(t)).collect(),
        }
    }

    /// Merge words with identical factor structure and drop exact zeros.
    pub fn canonical(&self) -> WordSum {
        let mut keyed: Vec<(Vec<u8>, Word)> = Vec::new();
        'outer: for w in &self.words {
            let key = word_key(w);
            for (k, acc) in keyed.iter_mut() {
                if *k == key {
                    acc.coefficient += w.coefficient;
                    continue 'outer;
                }
            }
            keyed.push((key, w.clone()));
        }
        keyed.retain(|(_, w)| w.coefficient != Complex64::new(0.0, 0.0));
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        WordSum {
            words: keyed.into_iter().map(|(_, w)| w).collect(),
        }
    }

    /// Equality as formal sums, up to `tol` on coefficients.
    ///
    /// Words are expanded multilinearly over their arguments' terms; atoms
    /// whose non-coefficient data agree bit for bit are merged, so the
    /// comparison tolerates reordered floating-point products but nothing
    /// structural.
    pub fn approx_eq(&self, other: &WordSum, tol: f64) -> bool {
        let mut table: Vec<(Vec<u8>, Complex64)> = Vec::new();
        let mut absorb = |sum: &WordSum, sign: f64| {
            for w in &sum.words {
                'atom: for (key, c) in atoms(w) {
                    for entry in table.iter_mut() {
                        if entry.0 == key {
                            entry.1 += sign * c;
                            continue 'atom;
                        }
                    }
                    table.push((key, sign * c));
                }
            }
        };
        absorb(self, 1.0);
        absorb(other, -1.0);
        table.iter().all(|(_, c)| c.norm() <= tol)
    }

    /// State value, summed with first-order error accumulation.
    pub fn eval(&self, phi: &dyn TwoPoint) -> Measured {
        let mut acc = Measured::exact(Complex64::new(0.0, 0.0));
        for w in &self.words {
            acc = acc.add(mixed_eval(phi, w));
        }
        acc
    }
}

fn word_key(w: &Word) -> Vec<u8> {
    let mut key = Vec::new();
    for g in &w.factors {
        key.push(match g.species {
            Species::Fermion => b'F',
            Species::Boson => b'J',
        });
        key.push(if g.starred { b'*' } else { b'.' });
        let mut terms: Vec<[u64; 7]> = g
            .argument
            .terms
            .iter()
            .map(|t| {
                [
                    t.component as u64,
                    t.order as u64,
                    t.scale.to_bits(),
                    t.shift.to_bits(),
                    t.modulation.to_bits(),
                    t.coeff.re.to_bits(),
                    t.coeff.im.to_bits(),
                ]
            })
            .collect();
        terms.sort_unstable();
        for t in terms {
            for x in t {
                key.extend_from_slice(&x.to_le_bytes());
            }
        }
        key.push(b'|');
    }
    key
}

/// Multilinear expansion of a word over its arguments' term lists.
///
/// Each atom picks one term per factor; the key records species, star flag,
/// and the term's shape fields, the scalar collects the word coefficient
/// times the chosen term coefficients.
fn atoms(w: &Word) -> Vec<(Vec<u8>, Complex64)> {
    let mut acc: Vec<(Vec<u8>, Complex64)> = alloc::vec![(Vec::new(), w.coefficient)];
    for g in &w.factors {
        let mut next = Vec::with_capacity(acc.len() * g.argument.terms.len().max(1));
        for t in &g.argument.terms {
            let mut piece = Vec::new();
            piece.push(match g.species {
                Species::Fermion => b'F',
                Species::Boson => b'J',
            });
            piece.push(if g.starred { b'*' } else { b'.' });
            for x in [
                t.component as u64,
                t.order as u64,
                t.scale.to_bits(),
                t.shift.to_bits(),
                t.modulation.to_bits(),
            ] {
                piece.extend_from_slice(&x.to_le_bytes());
            }
            for (key, c) in &acc {
                let mut k = key.clone();
                k.extend_from_slice(&piece);
                next.push((k, c * t.coeff));
            }
        }
        acc = next;
    }
    acc
}

/// Graded derivation of a single normalized word.
///
/// Factor rules: `F(f) -> J(f)` and `J(f) -> i F(f')`; the term replacing
/// factor `k` carries the sign of the fermion parity of the prefix before it.
pub fn delta(w: &Word) -> WordSum {
    assert!(w.is_normalized(), "delta expects a star-free word");
    let mut words = Vec::with_capacity(w.factors.len());
    let mut prefix_fermions = 0usize;
    for (k, g) in w.factors.iter().enumerate() {
        let sign = if prefix_fermions % 2 == 0 { 1.0 } else { -1.0 };
        let (replacement, extra) = match g.species {
            Species::Fermion => (
                Generator::boson(g.argument.clone()),
                Complex64::new(sign, 0.0),
            ),
            Species::Boson => (
                Generator::fermion(g.argument.derivative()),
                Complex64::new(0.0, sign),
            ),
        };
        let mut factors = w.factors.clone();
        factors[k] = replacement;
        let mut out = Word::from_factors(factors);
        out.coefficient = w.coefficient * extra;
        words.push(out);
        if g.species == Species::Fermion {
            prefix_fermions += 1;
        }
    }
    WordSum { words }
}

/// Linear extension of `delta` to sums.
pub fn delta_sum(s: &WordSum) -> WordSum {
    let mut out = WordSum::zero();
    for w in &s.words {
        out = out.add(delta(w));
    }
    out
}

/// `delta` applied twice, canonicalized so the cross terms cancel.
pub fn delta_squared(w: &Word) -> WordSum {
    delta_sum(&delta(w)).canonical()
}

/// Closed form for the square: `i` times the sum over factors of the word
/// with that factor's argument differentiated.
pub fn translation_generator(w: &Word) -> WordSum {
    let mut words = Vec::with_capacity(w.factors.len());
    for k in 0..w.factors.len() {
        let mut factors = w.factors.clone();
        factors[k].argument = factors[k].argument.derivative();
        let mut out = Word::from_factors(factors);
        out.coefficient = w.coefficient * Complex64::new(0.0, 1.0);
        words.push(out);
    }
    WordSum { words }.canonical()
}

/// Invariance of the state under the derivation.
///
/// Returns `|phi(delta(w))|` relative to the largest single-word magnitude
/// appearing in the sum (so the figure reflects genuine cancellation, not a
/// trivially small input).
pub fn s4_check(phi: &dyn TwoPoint, w: &Word) -> f64 {
    let dw = delta(w);
    let mut scale = 0.0f64;
    let mut total = Measured::exact(Complex64::new(0.0, 0.0));
    for word in &dw.words {
        let v = mixed_eval(phi, word);
        scale = scale.max(v.value.norm());
        total = total.add(v);
    }
    total.value.norm() / scale.max(1e-12)
}

/// Derivation squared against the time derivative of the evolved middle word.
///
/// Compares `phi(x * delta^2(y) * z)` with `-i d/dt phi(x * y_t * z)` at
/// `t = 0`, the derivative taken as a central difference with step `h`.
/// Returns the residual relative to `max(1, |lhs|)`.
pub fn s5_check(phi: &dyn TwoPoint, x: &Word, y: &Word, z: &Word, h: f64) -> f64 {
    let lhs = delta_squared(y).sandwich(x, z).eval(phi).value;
    let plus = mixed_eval(phi, &x.mul(&y.translate_all(h)).mul(z)).value;
    let minus = mixed_eval(phi, &x.mul(&y.translate_all(-h)).mul(z)).value;
    let rhs = Complex64::new(0.0, -1.0) * (plus - minus) / (2.0 * h);
    (lhs - rhs).norm() / lhs.norm().max(1.0)
}
