//! Mermin operators for a three-party GHZ state and the local hidden variable
//! bookkeeping that contradicts them.
//!
//! A [`QubitEmbedding`] picks two basis labels of one subsystem and treats
//! them as a qubit: `σx = |+⟩⟨-| + |-⟩⟨+|`, `σy = -i(|+⟩⟨-| - |-⟩⟨+|)`.
//! Outside those two labels every σ acts as zero, so squares of the Pauli
//! products are the projector onto the embedded 8-dimensional subspace rather
//! than the identity.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hilbert::{CompositeSystem, StateVector};
use crate::linalg::CMatrix;
use crate::scalar::{im, re, Real};

/// Relative sign of a GHZ superposition, or of the cavity preparation it
/// descends from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn as_real<T: Real>(self) -> T {
        T::lit(self.value() as f64)
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Two labels of a subsystem playing the roles of `|↑⟩` (`plus_label`) and
/// `|↓⟩` (`minus_label`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QubitEmbedding {
    pub subsystem: String,
    pub plus_label: String,
    pub minus_label: String,
}

impl QubitEmbedding {
    pub fn new(subsystem: impl Into<String>, plus: impl Into<String>, minus: impl Into<String>) -> Self {
        Self { subsystem: subsystem.into(), plus_label: plus.into(), minus_label: minus.into() }
    }

    /// The embedding a subsystem's kind suggests: `(f, g)` for a cascade atom,
    /// `(b, c)` for a lambda atom, `(0, 1)` for a mode, `(upper, lower)` for a
    /// two-level atom.
    pub fn natural(system: &CompositeSystem, subsystem: &str) -> Result<Self> {
        let spec = system.subsystem(subsystem)?;
        let (p, m) = spec.qubit_levels();
        Ok(Self::new(subsystem, spec.label(p), spec.label(m)))
    }

    /// `(position, plus level, minus level)` in `system`.
    fn resolve(&self, system: &CompositeSystem) -> Result<(usize, usize, usize)> {
        let position = system.position(&self.subsystem)?;
        let spec = &system.subsystems()[position];
        let level = |label: &str| {
            spec.label_index(label).ok_or_else(|| Error::InvalidEmbedding {
                subsystem: self.subsystem.clone(),
                reason: format!("no basis label `{label}`"),
            })
        };
        let (p, m) = (level(&self.plus_label)?, level(&self.minus_label)?);
        if p == m {
            return Err(Error::InvalidEmbedding {
                subsystem: self.subsystem.clone(),
                reason: "plus and minus labels coincide".into(),
            });
        }
        Ok((position, p, m))
    }
}

/// Full-space σx or σy acting on one embedded qubit.
pub fn sigma<T: Real>(system: &CompositeSystem, axis: Axis, emb: &QubitEmbedding) -> Result<CMatrix<T>> {
    let (position, p, m) = emb.resolve(system)?;
    let stride = system.stride(position);
    // ⟨-|σ|+⟩ and ⟨+|σ|-⟩
    let (down, up) = match axis {
        Axis::X => (re(T::one()), re(T::one())),
        Axis::Y => (im(T::one()), im(-T::one())),
    };
    let dim = system.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let level = system.level(i, position);
        if level == p {
            out[(i + m * stride - p * stride, i)] = down;
        } else if level == m {
            out[(i + p * stride - m * stride, i)] = up;
        }
    }
    Ok(out)
}

/// The four Mermin operators
/// `A = σx¹σy²σy³`, `B = σy¹σx²σy³`, `C = σy¹σy²σx³`, `D = σx¹σx²σx³`.
#[derive(Clone, Debug)]
pub struct MerminSet<T> {
    pub a: CMatrix<T>,
    pub b: CMatrix<T>,
    pub c: CMatrix<T>,
    pub d: CMatrix<T>,
}

fn check_distinct(embeddings: &[QubitEmbedding; 3]) -> Result<()> {
    for i in 0..3 {
        for j in i + 1..3 {
            if embeddings[i].subsystem == embeddings[j].subsystem {
                return Err(Error::EmbeddingCollision(embeddings[i].subsystem.clone()));
            }
        }
    }
    Ok(())
}

pub fn build_mermin<T: Real>(system: &CompositeSystem, embeddings: &[QubitEmbedding; 3]) -> Result<MerminSet<T>> {
    check_distinct(embeddings)?;
    let mut xs = Vec::with_capacity(3);
    let mut ys = Vec::with_capacity(3);
    for emb in embeddings {
        xs.push(sigma::<T>(system, Axis::X, emb)?);
        ys.push(sigma::<T>(system, Axis::Y, emb)?);
    }
    let prod = |p: &CMatrix<T>, q: &CMatrix<T>, r: &CMatrix<T>| &(p * q) * r;
    Ok(MerminSet {
        a: prod(&xs[0], &ys[1], &ys[2]),
        b: prod(&ys[0], &xs[1], &ys[2]),
        c: prod(&ys[0], &ys[1], &xs[2]),
        d: prod(&xs[0], &xs[1], &xs[2]),
    })
}

/// Projector onto the span of the `2³` basis states whose three embedded
/// subsystems all sit on an embedded label.
pub fn embedded_projector<T: Real>(system: &CompositeSystem, embeddings: &[QubitEmbedding; 3]) -> Result<CMatrix<T>> {
    check_distinct(embeddings)?;
    let resolved = embeddings.iter().map(|e| e.resolve(system)).collect::<Result<Vec<_>>>()?;
    let diag: Vec<Complex<T>> = (0..system.dim())
        .map(|i| {
            let inside = resolved.iter().all(|&(pos, p, m)| {
                let l = system.level(i, pos);
                l == p || l == m
            });
            if inside { Complex::one() } else { Complex::zero() }
        })
        .collect();
    Ok(CMatrix::from_diagonal(&diag))
}

/// `(|+ + +⟩ ± |- - -⟩)/√2` on a system made of exactly the three embedded
/// subsystems.
pub fn ghz_state<T: Real>(system: &Arc<CompositeSystem>, embeddings: &[QubitEmbedding; 3], sign: Sign) -> Result<StateVector<T>> {
    check_distinct(embeddings)?;
    if system.len() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: system.len() });
    }
    let mut plus = vec![String::new(); 3];
    let mut minus = vec![String::new(); 3];
    for emb in embeddings {
        let (pos, _, _) = emb.resolve(system)?;
        plus[pos] = emb.plus_label.clone();
        minus[pos] = emb.minus_label.clone();
    }
    let plus: Vec<&str> = plus.iter().map(String::as_str).collect();
    let minus: Vec<&str> = minus.iter().map(String::as_str).collect();
    StateVector::superposition(system, &[(re(T::one()), &plus), (re(sign.as_real()), &minus)])
}

/// Spectral norm of `XY - YX`.
pub fn commutator_norm<T: Real>(x: &CMatrix<T>, y: &CMatrix<T>) -> T {
    (&(x * y) - &(y * x)).op_norm()
}

/// `⟨ψ|op|ψ⟩`, rejecting results whose imaginary part exceeds `tol`.
pub fn expectation<T: Real>(op: &CMatrix<T>, state: &StateVector<T>, tol: T) -> Result<T> {
    let amps = state.amplitudes();
    if op.cols() != amps.len() {
        return Err(Error::DimensionMismatch { expected: amps.len(), got: op.cols() });
    }
    let image = op.mul_vec(amps);
    let value = amps.iter().zip(&image).fold(Complex::<T>::zero(), |acc, (a, b)| acc + a.conj() * b);
    if value.im.abs() > tol {
        return Err(Error::NotHermitian(value.im.to_f64()));
    }
    Ok(value.re)
}

/// Predetermined ±1 outcomes of σx and σy on each of the three parties.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LhvAssignment {
    pub m_x: [i8; 3],
    pub m_y: [i8; 3],
}

impl LhvAssignment {
    /// All 64 assignments; bit `k` of the index sets `m_x[k]`, bit `k + 3`
    /// sets `m_y[k]` (set bit means −1).
    pub fn all() -> impl Iterator<Item = Self> {
        (0u8..64).map(|bits| {
            let v = |b: u8| if bits >> b & 1 == 1 { -1 } else { 1 };
            Self { m_x: [v(0), v(1), v(2)], m_y: [v(3), v(4), v(5)] }
        })
    }

    pub fn a(&self) -> i8 {
        self.m_x[0] * self.m_y[1] * self.m_y[2]
    }

    pub fn b(&self) -> i8 {
        self.m_y[0] * self.m_x[1] * self.m_y[2]
    }

    pub fn c(&self) -> i8 {
        self.m_y[0] * self.m_y[1] * self.m_x[2]
    }

    pub fn d(&self) -> i8 {
        self.m_x[0] * self.m_x[1] * self.m_x[2]
    }
}

/// Outcome of the exhaustive local-hidden-variable scan for one GHZ sign.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LhvReport {
    pub sign: Sign,
    pub assignments: usize,
    /// Assignments reproducing the quantum values `a = b = c = ∓1`.
    pub consistent: Vec<LhvAssignment>,
    /// Consistent assignments that also reproduce the quantum `d = ±1`.
    pub counterexamples: usize,
    pub quantum_d: i8,
}

impl LhvReport {
    /// The `d` value shared by every consistent assignment.
    pub fn local_d(&self) -> Option<i8> {
        let first = self.consistent.first()?.d();
        self.consistent.iter().all(|a| a.d() == first).then_some(first)
    }
}

pub fn lhv_ledger(sign: Sign) -> LhvReport {
    let quantum_abc = -sign.value();
    let quantum_d = sign.value();
    let consistent: Vec<_> = LhvAssignment::all()
        .filter(|s| s.a() == quantum_abc && s.b() == quantum_abc && s.c() == quantum_abc)
        .collect();
    let counterexamples = consistent.iter().filter(|s| s.d() == quantum_d).count();
    LhvReport { sign, assignments: 64, consistent, counterexamples, quantum_d }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemSpec;

    fn cascade_system() -> Arc<CompositeSystem> {
        CompositeSystem::shared(vec![
            SubsystemSpec::cascade("A1"),
            SubsystemSpec::cascade("A2"),
            SubsystemSpec::fock("C", 4),
        ])
        .unwrap()
    }

    fn cascade_embeddings() -> [QubitEmbedding; 3] {
        [
            QubitEmbedding::new("A1", "f", "g"),
            QubitEmbedding::new("A2", "f", "g"),
            QubitEmbedding::new("C", "0", "1"),
        ]
    }

    fn apply(op: &CMatrix<f64>, s: &StateVector<f64>) -> Vec<Complex<f64>> {
        op.mul_vec(s.amplitudes())
    }

    #[test]
    fn single_sigma_actions() {
        let sys = CompositeSystem::shared(vec![SubsystemSpec::cascade("A")]).unwrap();
        let emb = QubitEmbedding::new("A", "f", "g");
        let g = StateVector::<f64>::basis(&sys, &["g"]).unwrap();
        let f = StateVector::<f64>::basis(&sys, &["f"]).unwrap();
        let e = StateVector::<f64>::basis(&sys, &["e"]).unwrap();
        let sx = sigma::<f64>(&sys, Axis::X, &emb).unwrap();
        let sy = sigma::<f64>(&sys, Axis::Y, &emb).unwrap();
        assert_eq!(apply(&sx, &g), f.amplitudes());
        assert_eq!(apply(&sy, &f), vec![re(0.0), re(0.0), im(1.0)]);
        assert!(apply(&sx, &e).iter().all(|a| a.norm() == 0.0));
        assert!(sx.hermiticity_deviation() == 0.0 && sy.hermiticity_deviation() == 0.0);
    }

    #[test]
    fn cavity_sigma_is_zero_above_one_photon() {
        let sys = CompositeSystem::shared(vec![SubsystemSpec::fock("C", 4)]).unwrap();
        let emb = QubitEmbedding::new("C", "0", "1");
        let sx = sigma::<f64>(&sys, Axis::X, &emb).unwrap();
        let one = StateVector::<f64>::basis(&sys, &["1"]).unwrap();
        assert_eq!(apply(&sx, &one), vec![re(1.0), re(0.0), re(0.0), re(0.0)]);
        for n in 2..4 {
            assert_eq!(sx[(n, n)], re(0.0));
            assert!((0..4).all(|r| sx[(r, n)] == re(0.0)));
        }
    }

    #[test]
    fn single_qubit_commutator() {
        let sys = CompositeSystem::shared(vec![SubsystemSpec::two_level("Q")]).unwrap();
        let emb = QubitEmbedding::natural(&sys, "Q").unwrap();
        let sx = sigma::<f64>(&sys, Axis::X, &emb).unwrap();
        let sy = sigma::<f64>(&sys, Axis::Y, &emb).unwrap();
        assert!((commutator_norm(&sx, &sy) - 2.0).abs() < 1e-12);
        assert_eq!(commutator_norm(&sx, &sx), 0.0);
    }

    #[test]
    fn mermin_algebra() {
        let sys = cascade_system();
        let embs = cascade_embeddings();
        let m = build_mermin::<f64>(&sys, &embs).unwrap();
        let proj = embedded_projector::<f64>(&sys, &embs).unwrap();
        for op in [&m.a, &m.b, &m.c, &m.d] {
            assert!(op.hermiticity_deviation() < 1e-12);
            assert!((op * op).max_abs_diff(&proj) < 1e-12);
        }
        assert!(commutator_norm(&m.a, &m.b) < 1e-12);
        assert!(commutator_norm(&m.a, &m.c) < 1e-12);
        assert!(commutator_norm(&m.b, &m.c) < 1e-12);
        let abc = &(&m.a * &m.b) * &m.c;
        assert!((&m.d + &abc).max_abs() < 1e-12);
        assert_eq!(proj.trace(), re(8.0));
    }

    #[test]
    fn ghz_eigenvalues() {
        let sys = cascade_system();
        let embs = cascade_embeddings();
        let m = build_mermin::<f64>(&sys, &embs).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let psi = ghz_state::<f64>(&sys, &embs, sign).unwrap();
            let s = sign.as_real::<f64>();
            for op in [&m.a, &m.b, &m.c] {
                assert!((expectation(op, &psi, 1e-10).unwrap() + s).abs() < 1e-12);
            }
            assert!((expectation(&m.d, &psi, 1e-10).unwrap() - s).abs() < 1e-12);
            let image = apply(&m.d, &psi);
            for (a, b) in image.iter().zip(psi.amplitudes()) {
                assert!((a - b * s).norm() < 1e-12);
            }
        }
        let ff0 = StateVector::<f64>::basis(&sys, &["f", "f", "0"]).unwrap();
        assert_eq!(expectation(&m.d, &ff0, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn lambda_embedding_eigenvalues() {
        let sys = CompositeSystem::shared(vec![
            SubsystemSpec::lambda("A1"),
            SubsystemSpec::lambda("A2"),
            SubsystemSpec::fock("C", 3),
        ])
        .unwrap();
        let embs = [
            QubitEmbedding::natural(&sys, "A1").unwrap(),
            QubitEmbedding::natural(&sys, "A2").unwrap(),
            QubitEmbedding::natural(&sys, "C").unwrap(),
        ];
        assert_eq!(embs[0], QubitEmbedding::new("A1", "b", "c"));
        let m = build_mermin::<f64>(&sys, &embs).unwrap();
        let psi = ghz_state::<f64>(&sys, &embs, Sign::Minus).unwrap();
        assert!((expectation(&m.d, &psi, 1e-10).unwrap() + 1.0).abs() < 1e-12);
        assert!((expectation(&m.b, &psi, 1e-10).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_errors() {
        let sys = cascade_system();
        let mut embs = cascade_embeddings();
        embs[1].subsystem = "A1".into();
        assert!(matches!(build_mermin::<f64>(&sys, &embs), Err(Error::EmbeddingCollision(_))));
        let bad = QubitEmbedding::new("A1", "f", "f");
        assert!(matches!(sigma::<f64>(&sys, Axis::X, &bad), Err(Error::InvalidEmbedding { .. })));
        let bad = QubitEmbedding::new("A1", "f", "b");
        assert!(matches!(sigma::<f64>(&sys, Axis::X, &bad), Err(Error::InvalidEmbedding { .. })));
        let bad = QubitEmbedding::new("B", "f", "g");
        assert!(sigma::<f64>(&sys, Axis::X, &bad).is_err());
    }

    #[test]
    fn non_hermitian_expectation_is_rejected() {
        let sys = cascade_system();
        let embs = cascade_embeddings();
        let sx = sigma::<f64>(&sys, Axis::X, &embs[0]).unwrap();
        let op = sx.scale(im(1.0));
        let psi = StateVector::<f64>::superposition(&sys, &[(re(1.0), &["f", "g", "0"]), (re(1.0), &["g", "g", "0"])]).unwrap();
        assert!(matches!(expectation(&op, &psi, 1e-10), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn lhv_scan_has_no_counterexample() {
        for sign in [Sign::Plus, Sign::Minus] {
            let report = lhv_ledger(sign);
            assert_eq!(report.assignments, 64);
            assert_eq!(report.counterexamples, 0);
            assert!(!report.consistent.is_empty());
            assert_eq!(report.local_d(), Some(-sign.value()));
            assert_eq!(report.quantum_d, sign.value());
        }
        let all_up = LhvAssignment { m_x: [1; 3], m_y: [1; 3] };
        assert!(!lhv_ledger(Sign::Plus).consistent.contains(&all_up));
        assert_eq!(LhvAssignment::all().count(), 64);
    }
}
