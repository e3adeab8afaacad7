//! Composite Hilbert spaces of atoms and truncated cavity modes.
//!
//! Basis indices are row-major over the subsystems in declaration order, so a
//! system declared as `[A1, A2, C]` stores `|x₁ x₂ n⟩` at
//! `(x₁ · d₂ + x₂) · d_C + n`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

/// Level structure of a single subsystem. Labels are listed in basis order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SubsystemKind {
    /// Two-level atom, basis `(upper, lower)`.
    TwoLevel { upper: String, lower: String },
    /// Ladder atom, basis `(e, f, g)`.
    Cascade,
    /// Lambda atom, basis `(a, b, c)`.
    Lambda,
    /// Cavity mode truncated to `|0⟩ .. |cutoff-1⟩`.
    Fock { cutoff: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemSpec {
    pub name: String,
    pub kind: SubsystemKind,
}

impl SubsystemSpec {
    /// Two-level atom with levels `e` (upper) and `f` (lower).
    pub fn two_level(name: impl Into<String>) -> Self {
        Self::two_level_labeled(name, "e", "f")
    }

    pub fn two_level_labeled(
        name: impl Into<String>,
        upper: impl Into<String>,
        lower: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            kind: SubsystemKind::TwoLevel { upper: upper.into(), lower: lower.into() },
        }
    }

    pub fn cascade(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SubsystemKind::Cascade }
    }

    pub fn lambda(name: impl Into<String>) -> Self {
        Self { name: name.into(), kind: SubsystemKind::Lambda }
    }

    pub fn fock(name: impl Into<String>, cutoff: usize) -> Self {
        Self { name: name.into(), kind: SubsystemKind::Fock { cutoff } }
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SubsystemKind::TwoLevel { .. } => 2,
            SubsystemKind::Cascade | SubsystemKind::Lambda => 3,
            SubsystemKind::Fock { cutoff } => *cutoff,
        }
    }

    pub fn label(&self, index: usize) -> String {
        match &self.kind {
            SubsystemKind::TwoLevel { upper, lower } => [upper, lower][index].clone(),
            SubsystemKind::Cascade => ["e", "f", "g"][index].to_string(),
            SubsystemKind::Lambda => ["a", "b", "c"][index].to_string(),
            SubsystemKind::Fock { .. } => index.to_string(),
        }
    }

    pub fn labels(&self) -> Vec<String> {
        (0..self.dim()).map(|i| self.label(i)).collect()
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        match &self.kind {
            SubsystemKind::Fock { cutoff } => label.parse::<usize>().ok().filter(|n| n < cutoff),
            _ => (0..self.dim()).find(|&i| self.label(i) == label),
        }
    }

    /// The two levels that play the role of a qubit: `(e, f)` for two-level
    /// atoms, `(f, g)` for cascade atoms, `(b, c)` for lambda atoms and
    /// `(|0⟩, |1⟩)` for a cavity mode.
    pub fn qubit_levels(&self) -> (usize, usize) {
        match self.kind {
            SubsystemKind::TwoLevel { .. } | SubsystemKind::Fock { .. } => (0, 1),
            SubsystemKind::Cascade | SubsystemKind::Lambda => (1, 2),
        }
    }

    pub fn is_fock(&self) -> bool {
        matches!(self.kind, SubsystemKind::Fock { .. })
    }

    fn validate(&self) -> Result<()> {
        match &self.kind {
            SubsystemKind::Fock { cutoff } if *cutoff < 2 => {
                Err(Error::InvalidCutoff { name: self.name.clone(), cutoff: *cutoff })
            }
            SubsystemKind::TwoLevel { upper, lower } if upper == lower => {
                Err(Error::InvalidParameter(format!(
                    "two-level atom `{}` has repeated label `{upper}`",
                    self.name
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Ordered list of subsystems with row-major basis indexing.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositeSystem {
    subsystems: Vec<SubsystemSpec>,
    strides: Vec<usize>,
    dim: usize,
}

impl CompositeSystem {
    pub fn new(specs: Vec<SubsystemSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::EmptySystem);
        }
        for (i, s) in specs.iter().enumerate() {
            s.validate()?;
            if specs[..i].iter().any(|o| o.name == s.name) {
                return Err(Error::DuplicateSubsystem(s.name.clone()));
            }
        }
        let mut strides = vec![1; specs.len()];
        for i in (0..specs.len() - 1).rev() {
            strides[i] = strides[i + 1] * specs[i + 1].dim();
        }
        let dim = strides[0] * specs[0].dim();
        Ok(Self { subsystems: specs, strides, dim })
    }

    pub fn shared(specs: Vec<SubsystemSpec>) -> Result<Arc<Self>> {
        Self::new(specs).map(Arc::new)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn subsystems(&self) -> &[SubsystemSpec] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSubsystem(name.to_string()))
    }

    pub fn subsystem(&self, name: &str) -> Result<&SubsystemSpec> {
        self.position(name).map(|p| &self.subsystems[p])
    }

    pub fn stride(&self, position: usize) -> usize {
        self.strides[position]
    }

    /// Flat index of a per-subsystem level tuple.
    pub fn index_of(&self, levels: &[usize]) -> usize {
        assert_eq!(levels.len(), self.subsystems.len(), "one level per subsystem");
        levels.iter().zip(&self.strides).map(|(l, s)| l * s).sum()
    }

    /// Level of subsystem `position` in basis state `index`.
    pub fn level(&self, index: usize, position: usize) -> usize {
        (index / self.strides[position]) % self.subsystems[position].dim()
    }

    pub fn levels(&self, index: usize) -> Vec<usize> {
        (0..self.subsystems.len()).map(|p| self.level(index, p)).collect()
    }

    pub fn index_of_labels(&self, labels: &[&str]) -> Result<usize> {
        if labels.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch { expected: self.subsystems.len(), got: labels.len() });
        }
        let levels = self
            .subsystems
            .iter()
            .zip(labels)
            .map(|(s, l)| {
                s.label_index(l)
                    .ok_or_else(|| Error::UnknownLabel { subsystem: s.name.clone(), label: l.to_string() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.index_of(&levels))
    }

    /// Human-readable ket for basis index, e.g. `|f,g,1⟩`.
    pub fn ket_label(&self, index: usize) -> String {
        let parts: Vec<String> =
            self.subsystems.iter().enumerate().map(|(p, s)| s.label(self.level(index, p))).collect();
        format!("|{}⟩", parts.join(","))
    }
}

/// Normalised pure state on a composite system.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    system: Arc<CompositeSystem>,
    amps: Vec<Complex<T>>,
}

/// Result of a projective measurement on one subsystem.
#[derive(Clone, Debug)]
pub struct Measurement<T> {
    pub level: usize,
    pub label: String,
    pub probability: T,
    pub state: StateVector<T>,
}

impl<T: Real> StateVector<T> {
    pub fn basis(system: &Arc<CompositeSystem>, labels: &[&str]) -> Result<Self> {
        let idx = system.index_of_labels(labels)?;
        let mut amps = vec![Complex::zero(); system.dim()];
        amps[idx] = Complex::new(T::one(), T::zero());
        Ok(Self { system: Arc::clone(system), amps })
    }

    /// Normalises `amps` onto `system`.
    pub fn from_amplitudes(system: &Arc<CompositeSystem>, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != system.dim() {
            return Err(Error::DimensionMismatch { expected: system.dim(), got: amps.len() });
        }
        let mut s = Self { system: Arc::clone(system), amps };
        let n = s.norm();
        if n == T::zero() || !n.is_finite() {
            return Err(Error::InvalidParameter("state has zero or non-finite norm".into()));
        }
        s.scale_amplitudes(T::one() / n);
        Ok(s)
    }

    /// Normalised superposition `Σ cₖ |labelsₖ⟩`.
    pub fn superposition(system: &Arc<CompositeSystem>, terms: &[(Complex<T>, &[&str])]) -> Result<Self> {
        let mut amps = vec![Complex::zero(); system.dim()];
        for (c, labels) in terms {
            amps[system.index_of_labels(labels)?] += *c;
        }
        Self::from_amplitudes(system, amps)
    }

    pub fn system(&self) -> &Arc<CompositeSystem> {
        &self.system
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, labels: &[&str]) -> Result<Complex<T>> {
        Ok(self.amps[self.system.index_of_labels(labels)?])
    }

    pub fn norm(&self) -> T {
        self.amps.iter().fold(T::zero(), |s, a| s + a.norm_sqr()).sqrt()
    }

    fn scale_amplitudes(&mut self, s: T) {
        for a in &mut self.amps {
            *a = *a * s;
        }
    }

    fn same_system(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.system, &other.system) || *self.system == *other.system {
            Ok(())
        } else {
            Err(Error::SystemMismatch)
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.same_system(other)?;
        Ok(self.amps.iter().zip(&other.amps).fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `|⟨self|other⟩|²`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies a bound operator on its target subsystems, identity elsewhere.
    ///
    /// Fails if the state has amplitude above `tol` on a basis state whose
    /// target-local index lies outside the operator's declared support.
    pub fn apply(&self, u: &Unitary<T>, tol: T) -> Result<Self> {
        let plan = ApplyPlan::new(&self.system, u)?;
        if let Some(support) = &u.support {
            let mut inside = vec![false; u.matrix.rows()];
            for &i in support {
                inside[i] = true;
            }
            for &base in &plan.bases {
                for (local, &off) in plan.offsets.iter().enumerate() {
                    let a = self.amps[base + off].norm();
                    if !inside[local] && a > tol {
                        return Err(Error::SupportViolation { index: base + off, amplitude: a.to_f64() });
                    }
                }
            }
        }
        let mut out = vec![Complex::zero(); self.amps.len()];
        let local_dim = plan.offsets.len();
        let mut gathered = vec![Complex::zero(); local_dim];
        for &base in &plan.bases {
            for (g, &off) in gathered.iter_mut().zip(&plan.offsets) {
                *g = self.amps[base + off];
            }
            let mapped = u.matrix.mul_vec(&gathered);
            for (m, &off) in mapped.into_iter().zip(&plan.offsets) {
                out[base + off] = m;
            }
        }
        Ok(Self { system: Arc::clone(&self.system), amps: out })
    }

    /// Probability of each level of `subsystem`, in label order.
    pub fn marginal(&self, subsystem: &str) -> Result<Vec<(String, T)>> {
        let pos = self.system.position(subsystem)?;
        let spec = &self.system.subsystems()[pos];
        let mut probs = vec![T::zero(); spec.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[self.system.level(i, pos)] += a.norm_sqr();
        }
        Ok(probs.into_iter().enumerate().map(|(l, p)| (spec.label(l), p)).collect())
    }

    /// Projects `subsystem` onto `level` and renormalises. Returns the Born
    /// probability together with the collapsed state.
    pub fn project(&self, subsystem: &str, level: usize) -> Result<(T, Self)> {
        let pos = self.system.position(subsystem)?;
        let spec = &self.system.subsystems()[pos];
        let mut amps = self.amps.clone();
        let mut p = T::zero();
        for (i, a) in amps.iter_mut().enumerate() {
            if self.system.level(i, pos) == level {
                p += a.norm_sqr();
            } else {
                *a = Complex::zero();
            }
        }
        if p == T::zero() {
            return Err(Error::ZeroNorm { subsystem: subsystem.to_string(), label: spec.label(level) });
        }
        let mut s = Self { system: Arc::clone(&self.system), amps };
        s.scale_amplitudes(T::one() / p.sqrt());
        Ok((p, s))
    }

    /// Projective measurement of `subsystem` in its level basis.
    ///
    /// The outcome is drawn by inverse CDF over the levels in declaration
    /// order; a draw landing exactly on a boundary takes the lower level.
    /// Levels with zero probability are never selected.
    pub fn measure<R: Rng + ?Sized>(&self, subsystem: &str, rng: &mut R) -> Result<Measurement<T>> {
        let probs: Vec<T> = self.marginal(subsystem)?.into_iter().map(|(_, p)| p).collect();
        let total = probs.iter().fold(T::zero(), |s, &p| s + p);
        let u = T::lit(rng.gen::<f64>()) * total;
        let mut cum = T::zero();
        let mut chosen = None;
        for (l, &p) in probs.iter().enumerate() {
            if p <= T::zero() {
                continue;
            }
            cum += p;
            chosen = Some(l);
            if u <= cum {
                break;
            }
        }
        let level = chosen.ok_or_else(|| Error::ZeroNorm {
            subsystem: subsystem.to_string(),
            label: "<any>".to_string(),
        })?;
        let (probability, state) = self.project(subsystem, level)?;
        let label = self.system.subsystem(subsystem)?.label(level);
        Ok(Measurement { level, label, probability: probability / total, state })
    }

    /// Product state `self ⊗ other` on the concatenated system.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut specs = self.system.subsystems().to_vec();
        specs.extend(other.system.subsystems().iter().cloned());
        let system = CompositeSystem::shared(specs)?;
        let amps = self.amps.iter().flat_map(|a| other.amps.iter().map(move |b| a * b)).collect();
        Ok(Self { system, amps })
    }

    /// Removes `subsystem`, which must be (within `tol`) in the product state
    /// `|label⟩ ⊗ rest`. Returns the state of the remaining subsystems.
    pub fn factor_out(&self, subsystem: &str, label: &str, tol: T) -> Result<Self> {
        let pos = self.system.position(subsystem)?;
        let spec = &self.system.subsystems()[pos];
        let level = spec
            .label_index(label)
            .ok_or_else(|| Error::UnknownLabel { subsystem: subsystem.to_string(), label: label.to_string() })?;
        if self.system.len() == 1 {
            return Err(Error::InvalidParameter("cannot factor out the only subsystem".into()));
        }
        let (p, _) = self.project(subsystem, level)?;
        if (T::one() - p).abs() > tol {
            return Err(Error::Entangled(subsystem.to_string()));
        }
        let mut specs = self.system.subsystems().to_vec();
        specs.remove(pos);
        let rest = CompositeSystem::shared(specs)?;
        let amps = (0..self.amps.len())
            .filter(|&i| self.system.level(i, pos) == level)
            .map(|i| self.amps[i])
            .collect();
        Self::from_amplitudes(&rest, amps)
    }
}

impl<T: Real> fmt::Display for StateVector<T> {
    /// Lists non-negligible amplitudes, e.g. `0.7071+0i |f,f,0⟩ + ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cut = T::lit(1e-12);
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() <= cut {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i){}", a.re, a.im, self.system.ket_label(i))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Dense operator on an ordered tuple of subsystems.
///
/// `support` lists the local basis indices on which the matrix is guaranteed
/// unitary; truncated operators leave their top Fock sector frozen and
/// excluded from it.
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary<T> {
    targets: Vec<String>,
    dims: Vec<usize>,
    matrix: CMatrix<T>,
    support: Option<Vec<usize>>,
}

impl<T: Real> Unitary<T> {
    /// Unbound operator on local factors of dimensions `dims`.
    pub fn new(dims: Vec<usize>, matrix: CMatrix<T>, support: Option<Vec<usize>>) -> Result<Self> {
        let d: usize = dims.iter().product();
        if !matrix.is_square() || matrix.rows() != d {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.rows() });
        }
        if let Some(s) = &support {
            if let Some(&bad) = s.iter().find(|&&i| i >= d) {
                return Err(Error::DimensionMismatch { expected: d, got: bad });
            }
        }
        Ok(Self { targets: Vec::new(), dims, matrix, support })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d = dims.iter().product();
        Self { targets: Vec::new(), dims, matrix: CMatrix::identity(d), support: None }
    }

    /// Binds the operator to named subsystems, in factor order.
    pub fn on(mut self, targets: &[&str]) -> Result<Self> {
        if targets.len() != self.dims.len() {
            return Err(Error::DimensionMismatch { expected: self.dims.len(), got: targets.len() });
        }
        self.targets = targets.iter().map(|t| t.to_string()).collect();
        Ok(self)
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    pub fn unitarity_deviation(&self) -> T {
        self.matrix.unitarity_deviation(self.support.as_deref())
    }

    pub fn check_unitary(&self, tol: T) -> Result<()> {
        let dev = self.unitarity_deviation();
        if dev > tol {
            Err(Error::NotUnitary(dev.to_f64()))
        } else {
            Ok(())
        }
    }

    /// Embeds a single-factor 2×2 operator into a `dim`-level subsystem,
    /// acting on `levels` and as identity on the remaining levels.
    pub fn lift(&self, dim: usize, levels: (usize, usize)) -> Result<Self> {
        if self.dims != [2] {
            return Err(Error::InvalidParameter("only single-factor 2x2 operators can be lifted".into()));
        }
        if levels.0 == levels.1 || levels.0 >= dim || levels.1 >= dim {
            return Err(Error::InvalidParameter(format!("levels {levels:?} invalid for dimension {dim}")));
        }
        let mut m = CMatrix::identity(dim);
        let idx = [levels.0, levels.1];
        for r in 0..2 {
            for c in 0..2 {
                m[(idx[r], idx[c])] = self.matrix[(r, c)];
            }
        }
        Ok(Self { targets: self.targets.clone(), dims: vec![dim], matrix: m, support: None })
    }
}

/// Index bookkeeping for applying a local operator inside a composite system.
struct ApplyPlan {
    /// Flat offset of each local basis index (row-major over targets).
    offsets: Vec<usize>,
    /// Flat indices with every target level equal to zero.
    bases: Vec<usize>,
}

impl ApplyPlan {
    fn new<T: Real>(system: &CompositeSystem, u: &Unitary<T>) -> Result<Self> {
        if u.targets.is_empty() {
            return Err(Error::UnboundTargets);
        }
        let mut positions = Vec::with_capacity(u.targets.len());
        for (t, &d) in u.targets.iter().zip(&u.dims) {
            let p = system.position(t)?;
            if positions.contains(&p) {
                return Err(Error::InvalidParameter(format!("target `{t}` repeated")));
            }
            let sd = system.subsystems()[p].dim();
            if sd != d {
                return Err(Error::DimensionMismatch { expected: sd, got: d });
            }
            positions.push(p);
        }
        let mut offsets = vec![0usize];
        for (&p, &d) in positions.iter().zip(&u.dims) {
            let stride = system.stride(p);
            offsets = offsets.iter().flat_map(|&o| (0..d).map(move |l| o + l * stride)).collect();
        }
        let bases = (0..system.dim()).filter(|&i| positions.iter().all(|&p| system.level(i, p) == 0)).collect();
        Ok(Self { offsets, bases })
    }
}

/// Expands an operator on `targets` to the full space of `system`.
pub fn embed_operator<T: Real>(system: &CompositeSystem, u: &Unitary<T>) -> Result<CMatrix<T>> {
    let plan = ApplyPlan::new(system, u)?;
    let mut full = CMatrix::zeros(system.dim(), system.dim());
    for &base in &plan.bases {
        for (r, &ro) in plan.offsets.iter().enumerate() {
            for (c, &co) in plan.offsets.iter().enumerate() {
                full[(base + ro, base + co)] = u.matrix[(r, c)];
            }
        }
    }
    Ok(full)
}
