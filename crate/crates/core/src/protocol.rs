//! GHZ preparation and test protocols as executable step lists.
//!
//! Every protocol runs on the same five-part system: the source atom `A0`
//! (two-level, `e`/`f`) that loads the cavity, the two GHZ atoms `A1` and
//! `A2` (cascade or lambda), the probe atom `A3` (two-level, `f`/`g`) and the
//! cavity mode `C`. Detected atoms stay in the system in their collapsed
//! state.
//!
//! Detecting the lower qubit label of an atom (`g` for cascade atoms and the
//! probe, `c` for lambda atoms) after its readout rotation counts as the σx
//! eigenvalue +1, the upper label as −1.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{
    cascade_dispersive, jc_dispersive, jc_unitary, lambda_dispersive, ramsey, DispersivePhase, JcParams, RamseyParams,
};
use crate::error::{Error, Result};
use crate::hilbert::{CompositeSystem, StateVector, SubsystemKind, SubsystemSpec, Unitary};
use crate::mermin::{sigma, Axis, QubitEmbedding, Sign};
use crate::scalar::Real;

pub const SOURCE: &str = "A0";
pub const PROBE: &str = "A3";
pub const CAVITY: &str = "C";

/// Level scheme of the two GHZ atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AtomFamily {
    Cascade,
    Lambda,
}

impl AtomFamily {
    fn spec(self, name: &str) -> SubsystemSpec {
        match self {
            AtomFamily::Cascade => SubsystemSpec::cascade(name),
            AtomFamily::Lambda => SubsystemSpec::lambda(name),
        }
    }

    /// Level the GHZ atoms start in.
    pub fn initial_label(self) -> &'static str {
        match self {
            AtomFamily::Cascade => "g",
            AtomFamily::Lambda => "b",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AtomFamily::Cascade => "cascade",
            AtomFamily::Lambda => "lambda",
        }
    }
}

impl fmt::Display for AtomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AtomFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cascade" => Ok(AtomFamily::Cascade),
            "lambda" => Ok(AtomFamily::Lambda),
            other => Err(Error::InvalidParameter(format!("unknown atom family `{other}`"))),
        }
    }
}

/// Fixed Ramsey-zone settings used by the protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NamedRotation {
    R0,
    R1,
    R2,
    R3,
    R4,
    K1,
    K2,
    K3,
}

impl NamedRotation {
    pub const ALL: [NamedRotation; 8] = [
        NamedRotation::R0,
        NamedRotation::R1,
        NamedRotation::R2,
        NamedRotation::R3,
        NamedRotation::R4,
        NamedRotation::K1,
        NamedRotation::K2,
        NamedRotation::K3,
    ];

    /// `R0 = K3 = (1/√2)[[1, i], [i, 1]]`, `R1..R4 = (1/√2)[[1, 1], [-1, 1]]`,
    /// `K1 = K2 = (1/√2)[[1, -1], [1, 1]]`.
    pub fn params<T: Real>(self) -> RamseyParams<T> {
        let (theta, chi) = match self {
            NamedRotation::R0 | NamedRotation::K3 => (T::PI(), T::FRAC_PI_4()),
            NamedRotation::R1 | NamedRotation::R2 | NamedRotation::R3 | NamedRotation::R4 => {
                (T::FRAC_PI_2(), T::FRAC_PI_4())
            }
            NamedRotation::K1 | NamedRotation::K2 => (T::FRAC_PI_2(), -T::FRAC_PI_4()),
        };
        RamseyParams { theta, chi }
    }

    /// Readout rotations applied just before detection.
    pub fn is_readout(self) -> bool {
        matches!(self, NamedRotation::K1 | NamedRotation::K2 | NamedRotation::K3)
    }
}

impl fmt::Display for NamedRotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for NamedRotation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|r| r.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown named matrix `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rotation<T> {
    Named(NamedRotation),
    Params(RamseyParams<T>),
}

impl<T: Real> Rotation<T> {
    pub fn params(&self) -> RamseyParams<T> {
        match self {
            Rotation::Named(n) => n.params(),
            Rotation::Params(p) => *p,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolStep<T> {
    /// Source atom `A0` through the preparation Ramsey zone, then a resonant
    /// π/2 pulse with the empty cavity.
    PrepareCavity { sign: Sign },
    RamseyRotate { atom: String, rotation: Rotation<T> },
    /// Dispersive passage through the cavity with phase `phi` per photon.
    DispersiveInteract { atom: String, phi: T },
    /// Resonant passage of a two-level atom with pulse area `gt`.
    ResonantInteract { atom: String, gt: T },
    Detect { atom: String },
}

impl<T> ProtocolStep<T> {
    /// The atom the step acts on.
    pub fn atom(&self) -> &str {
        match self {
            ProtocolStep::PrepareCavity { .. } => SOURCE,
            ProtocolStep::RamseyRotate { atom, .. }
            | ProtocolStep::DispersiveInteract { atom, .. }
            | ProtocolStep::ResonantInteract { atom, .. }
            | ProtocolStep::Detect { atom } => atom,
        }
    }

    fn is_interaction(&self) -> bool {
        matches!(
            self,
            ProtocolStep::PrepareCavity { .. }
                | ProtocolStep::DispersiveInteract { .. }
                | ProtocolStep::ResonantInteract { .. }
        )
    }
}

/// `[A0, A1, A2, A3, C]` for the given family.
pub fn protocol_system(family: AtomFamily, cutoff: usize) -> Result<Arc<CompositeSystem>> {
    CompositeSystem::shared(vec![
        SubsystemSpec::two_level(SOURCE),
        family.spec("A1"),
        family.spec("A2"),
        SubsystemSpec::two_level_labeled(PROBE, "f", "g"),
        SubsystemSpec::fock(CAVITY, cutoff),
    ])
}

/// `|f₀⟩|x₁⟩|x₂⟩|g₃⟩|0⟩` with `x` the family's starting level.
pub fn initial_state<T: Real>(family: AtomFamily, cutoff: usize) -> Result<StateVector<T>> {
    let system = protocol_system(family, cutoff)?;
    let x = family.initial_label();
    StateVector::basis(&system, &["f", x, x, "g", "0"])
}

/// The step list that prepares the GHZ state and runs the test on it.
pub fn builtin_steps<T: Real>(family: AtomFamily, sign: Sign) -> Vec<ProtocolStep<T>> {
    use NamedRotation::*;
    let rot = |atom: &str, r| ProtocolStep::RamseyRotate { atom: atom.into(), rotation: Rotation::Named(r) };
    let disp = |atom: &str| ProtocolStep::DispersiveInteract { atom: atom.into(), phi: T::PI() };
    let detect = |atom: &str| ProtocolStep::Detect { atom: atom.into() };
    let mut steps = vec![ProtocolStep::PrepareCavity { sign }];
    match family {
        AtomFamily::Cascade => steps.extend([
            rot("A1", R1),
            disp("A1"),
            rot("A1", R2),
            rot("A2", R3),
            disp("A2"),
            rot("A2", R4),
        ]),
        AtomFamily::Lambda => steps.extend([disp("A1"), disp("A2")]),
    }
    steps.extend([
        rot("A1", K1),
        detect("A1"),
        rot("A2", K2),
        detect("A2"),
        ProtocolStep::ResonantInteract { atom: PROBE.into(), gt: T::FRAC_PI_2() },
        rot(PROBE, K3),
        detect(PROBE),
    ]);
    steps
}

/// The four detection triples allowed for a GHZ state of the given sign.
pub fn table_branches(family: AtomFamily, sign: Sign) -> [[&'static str; 3]; 4] {
    match (family, sign) {
        (AtomFamily::Cascade, Sign::Plus) => {
            [["g1", "g2", "g3"], ["g1", "f2", "f3"], ["f1", "f2", "g3"], ["f1", "g2", "f3"]]
        }
        (AtomFamily::Cascade, Sign::Minus) => {
            [["g1", "g2", "f3"], ["g1", "f2", "g3"], ["f1", "f2", "f3"], ["f1", "g2", "g3"]]
        }
        (AtomFamily::Lambda, Sign::Plus) => {
            [["c1", "c2", "g3"], ["c1", "b2", "f3"], ["b1", "b2", "g3"], ["b1", "c2", "f3"]]
        }
        (AtomFamily::Lambda, Sign::Minus) => {
            [["c1", "c2", "f3"], ["c1", "b2", "g3"], ["b1", "b2", "f3"], ["b1", "c2", "g3"]]
        }
    }
}

fn invalid(step: usize, reason: impl Into<String>) -> Error {
    Error::Validation { step, reason: reason.into() }
}

/// Checks subsystem references and the detection ordering rules.
pub fn validate<T: Real>(system: &CompositeSystem, steps: &[ProtocolStep<T>]) -> Result<()> {
    let mut interacted: Vec<&str> = Vec::new();
    let mut detected: Vec<&str> = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let atom = step.atom();
        let spec = system.subsystem(atom).map_err(|_| invalid(i, format!("unknown atom `{atom}`")))?;
        if spec.is_fock() {
            return Err(invalid(i, format!("`{atom}` is a cavity mode, not an atom")));
        }
        if detected.contains(&atom) {
            let reason = match step {
                ProtocolStep::Detect { .. } => format!("`{atom}` is already detected"),
                _ => format!("`{atom}` was detected at an earlier step"),
            };
            return Err(invalid(i, reason));
        }
        match step {
            ProtocolStep::PrepareCavity { .. } => {}
            ProtocolStep::RamseyRotate { rotation, .. } => {
                let p = rotation.params();
                if !p.theta.is_finite() || !p.chi.is_finite() {
                    return Err(invalid(i, "rotation angles must be finite"));
                }
            }
            ProtocolStep::DispersiveInteract { phi, .. } => {
                if !phi.is_finite() {
                    return Err(invalid(i, "dispersive phase must be finite"));
                }
            }
            ProtocolStep::ResonantInteract { gt, .. } => {
                if !matches!(spec.kind, SubsystemKind::TwoLevel { .. }) {
                    return Err(invalid(i, format!("resonant interaction needs a two-level atom, `{atom}` is not")));
                }
                if !gt.is_finite() || *gt < T::zero() {
                    return Err(invalid(i, "pulse area must be finite and non-negative"));
                }
            }
            ProtocolStep::Detect { .. } => {
                if !interacted.contains(&atom) {
                    return Err(invalid(i, format!("`{atom}` is detected before interacting with the cavity")));
                }
                detected.push(atom);
            }
        }
        if step.is_interaction() {
            interacted.push(atom);
        }
    }
    Ok(())
}

fn rotation_on<T: Real>(system: &CompositeSystem, atom: &str, p: &RamseyParams<T>) -> Result<Unitary<T>> {
    let spec = system.subsystem(atom)?;
    ramsey(p).lift(spec.dim(), spec.qubit_levels())?.on(&[atom])
}

/// Ramsey setting of the preparation zone: `R0` for the `+` cavity state, its
/// `θ = 0` counterpart for `-`.
fn preparation_rotation<T: Real>(sign: Sign) -> RamseyParams<T> {
    match sign {
        Sign::Plus => NamedRotation::R0.params(),
        Sign::Minus => RamseyParams { theta: T::zero(), chi: T::FRAC_PI_4() },
    }
}

fn compile_step<T: Real>(system: &CompositeSystem, step: &ProtocolStep<T>) -> Result<Vec<Unitary<T>>> {
    let cutoff = system.subsystem(CAVITY)?.dim();
    let ops = match step {
        ProtocolStep::PrepareCavity { sign } => vec![
            rotation_on(system, SOURCE, &preparation_rotation(*sign))?,
            jc_unitary(&JcParams::resonant(T::one(), T::FRAC_PI_2()), cutoff)?.on(&[SOURCE, CAVITY])?,
        ],
        ProtocolStep::RamseyRotate { atom, rotation } => vec![rotation_on(system, atom, &rotation.params())?],
        ProtocolStep::DispersiveInteract { atom, phi } => {
            let phase = DispersivePhase(*phi);
            let u = match system.subsystem(atom)?.kind {
                SubsystemKind::TwoLevel { .. } => jc_dispersive(phase, cutoff)?,
                SubsystemKind::Cascade => cascade_dispersive(phase, cutoff)?,
                SubsystemKind::Lambda => lambda_dispersive(phase, T::zero(), T::zero(), cutoff)?,
                SubsystemKind::Fock { .. } => unreachable!("validated"),
            };
            vec![u.on(&[atom, CAVITY])?]
        }
        ProtocolStep::ResonantInteract { atom, gt } => {
            vec![jc_unitary(&JcParams::resonant(T::one(), *gt), cutoff)?.on(&[atom, CAVITY])?]
        }
        ProtocolStep::Detect { .. } => Vec::new(),
    };
    Ok(ops)
}

/// One detection event.
#[derive(Clone, Debug, PartialEq)]
pub struct Detection<T> {
    pub step: usize,
    pub atom: String,
    pub label: String,
    pub probability: T,
}

/// States after each step (`states[0]` is the initial state) and all
/// detections in order.
#[derive(Clone, Debug)]
pub struct Trace<T> {
    pub states: Vec<StateVector<T>>,
    pub detections: Vec<Detection<T>>,
}

/// σx eigenvalue assigned to detecting `level` of a subsystem: +1 for the
/// lower qubit label, −1 for the upper one, 0 for any other level.
pub fn detection_eigenvalue(spec: &SubsystemSpec, level: usize) -> i8 {
    let (upper, lower) = spec.qubit_levels();
    if level == lower {
        1
    } else if level == upper {
        -1
    } else {
        0
    }
}

/// Outcome label as reported in records, e.g. `g1` for level `g` of `A1`.
pub fn outcome_label(atom: &str, label: &str) -> String {
    let digits = atom.trim_start_matches(|c: char| !c.is_ascii_digit());
    format!("{label}{digits}")
}

/// One GHZ test shot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeRecord {
    pub shot: usize,
    pub labels: Vec<String>,
    pub eigs: Vec<i8>,
    pub product: i8,
}

/// Aggregate of a batch of shots.
#[derive(Clone, Debug)]
pub struct GhzRun<T> {
    pub records: Vec<OutcomeRecord>,
    /// Counts per detection triple.
    pub histogram: BTreeMap<Vec<String>, usize>,
    /// Mean of the per-shot products.
    pub empirical_product: T,
    /// `⟨D⟩` on the state that enters the readout stage.
    pub expected_d: T,
}

impl<T: Real> GhzRun<T> {
    fn from_records(records: Vec<OutcomeRecord>, expected_d: T) -> Self {
        let mut histogram = BTreeMap::new();
        for r in &records {
            *histogram.entry(r.labels.clone()).or_insert(0) += 1;
        }
        let sum: i64 = records.iter().map(|r| r.product as i64).sum();
        let empirical_product = T::lit(sum as f64) / T::lit(records.len().max(1) as f64);
        Self { records, histogram, empirical_product, expected_d }
    }

    pub fn frequencies(&self) -> BTreeMap<Vec<String>, T> {
        let n = T::lit(self.records.len() as f64);
        self.histogram.iter().map(|(k, &c)| (k.clone(), T::lit(c as f64) / n)).collect()
    }

    /// `⟨D⟩` rounded to ±1 when within `tol` of it.
    pub fn expected_sign(&self, tol: T) -> Option<i8> {
        [1i8, -1].into_iter().find(|&s| (self.expected_d - T::lit(s as f64)).abs() <= tol)
    }

    /// Every shot's product equals the rounded `⟨D⟩`.
    pub fn passed(&self, tol: T) -> bool {
        match self.expected_sign(tol) {
            Some(s) => self.records.iter().all(|r| r.product == s),
            None => false,
        }
    }
}

enum Action<T> {
    Apply(Unitary<T>),
    Detect(String),
}

/// Validated, compiled step list on the protocol system.
pub struct Interpreter<T> {
    system: Arc<CompositeSystem>,
    initial: StateVector<T>,
    tol: T,
    steps: Vec<ProtocolStep<T>>,
    /// `(step index, action)` in execution order.
    actions: Vec<(usize, Action<T>)>,
    /// Actions before the first detection, already applied to `prefix_state`.
    prefix_len: usize,
    prefix_state: StateVector<T>,
    /// State entering the readout stage.
    readout_state: StateVector<T>,
}

impl<T: Real> Interpreter<T> {
    pub fn new(family: AtomFamily, cutoff: usize, tol: T, steps: Vec<ProtocolStep<T>>) -> Result<Self> {
        let initial = initial_state::<T>(family, cutoff)?;
        let system = Arc::clone(initial.system());
        validate(&system, &steps)?;
        let mut actions = Vec::new();
        for (i, step) in steps.iter().enumerate() {
            match step {
                ProtocolStep::Detect { atom } => actions.push((i, Action::Detect(atom.clone()))),
                _ => actions.extend(compile_step(&system, step)?.into_iter().map(|u| (i, Action::Apply(u)))),
            }
        }
        let readout_step = steps
            .iter()
            .position(|s| match s {
                ProtocolStep::Detect { .. } => true,
                ProtocolStep::RamseyRotate { rotation: Rotation::Named(n), .. } => n.is_readout(),
                _ => false,
            })
            .unwrap_or(steps.len());
        let mut state = initial.clone();
        let mut readout_state = None;
        let mut prefix_len = 0;
        for (step, action) in &actions {
            if *step >= readout_step && readout_state.is_none() {
                readout_state = Some(state.clone());
            }
            match action {
                Action::Apply(u) => state = state.apply(u, tol).map_err(|e| at_step(*step, e))?,
                Action::Detect(_) => break,
            }
            prefix_len += 1;
        }
        let readout_state = readout_state.unwrap_or_else(|| state.clone());
        Ok(Self { system, initial, tol, steps, actions, prefix_len, prefix_state: state, readout_state })
    }

    pub fn system(&self) -> &Arc<CompositeSystem> {
        &self.system
    }

    pub fn steps(&self) -> &[ProtocolStep<T>] {
        &self.steps
    }

    pub fn initial_state(&self) -> &StateVector<T> {
        &self.initial
    }

    /// State entering the readout stage: just before the first detection or
    /// readout rotation.
    pub fn readout_state(&self) -> &StateVector<T> {
        &self.readout_state
    }

    /// Runs every step, recording the state after each one.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Trace<T>> {
        let mut states = vec![self.initial.clone()];
        let mut detections = Vec::new();
        let mut state = self.initial.clone();
        let mut actions = self.actions.iter().peekable();
        for i in 0..self.steps.len() {
            while let Some((_, action)) = actions.next_if(|(s, _)| *s == i) {
                state = self.execute(state, i, action, rng, &mut detections)?;
            }
            states.push(state.clone());
        }
        Ok(Trace { states, detections })
    }

    fn execute<R: Rng + ?Sized>(
        &self,
        state: StateVector<T>,
        step: usize,
        action: &Action<T>,
        rng: &mut R,
        detections: &mut Vec<Detection<T>>,
    ) -> Result<StateVector<T>> {
        match action {
            Action::Apply(u) => state.apply(u, self.tol).map_err(|e| at_step(step, e)),
            Action::Detect(atom) => {
                let m = state.measure(atom, rng)?;
                detections.push(Detection { step, atom: atom.clone(), label: m.label, probability: m.probability });
                Ok(m.state)
            }
        }
    }

    /// Detections of one shot, continuing from the cached deterministic prefix.
    pub fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<Detection<T>>> {
        let mut detections = Vec::new();
        let mut state = self.prefix_state.clone();
        for (step, action) in &self.actions[self.prefix_len..] {
            state = self.execute(state, *step, action, rng, &mut detections)?;
        }
        Ok(detections)
    }

    /// Per-shot generator: ChaCha8 seeded with `seed`, stream `index`.
    pub fn shot_rng(seed: u64, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        rng
    }

    fn record(&self, shot: usize, detections: &[Detection<T>]) -> Result<OutcomeRecord> {
        if detections.len() != 3 {
            return Err(invalid(self.steps.len(), format!("a GHZ shot needs 3 detections, got {}", detections.len())));
        }
        let mut labels = Vec::with_capacity(3);
        let mut eigs = Vec::with_capacity(3);
        for d in detections {
            let spec = self.system.subsystem(&d.atom)?;
            let level = spec.label_index(&d.label).expect("measured label exists");
            labels.push(outcome_label(&d.atom, &d.label));
            eigs.push(detection_eigenvalue(spec, level));
        }
        let product = eigs.iter().product();
        Ok(OutcomeRecord { shot, labels, eigs, product })
    }

    /// `⟨D⟩ = ⟨σx σx σx⟩` on [`Self::readout_state`], with the detected atoms
    /// as parties and the cavity standing in for the probe atom.
    pub fn expected_d(&self) -> Result<T> {
        let detected: Vec<&str> = self
            .steps
            .iter()
            .filter_map(|s| match s {
                ProtocolStep::Detect { atom } => Some(atom.as_str()),
                _ => None,
            })
            .collect();
        if detected.len() != 3 {
            return Err(invalid(self.steps.len(), format!("a GHZ test needs 3 detections, got {}", detected.len())));
        }
        let amps = self.readout_state.amplitudes();
        let mut image = amps.to_vec();
        for atom in detected {
            let party = if atom == PROBE { CAVITY } else { atom };
            let emb = QubitEmbedding::natural(&self.system, party)?;
            image = sigma::<T>(&self.system, Axis::X, &emb)?.mul_vec(&image);
        }
        let value = amps.iter().zip(&image).fold(Complex::<T>::zero(), |acc, (a, b)| acc + a.conj() * b);
        if value.im.abs() > self.tol {
            return Err(Error::NotHermitian(value.im.to_f64()));
        }
        Ok(value.re)
    }

    /// Runs `shots` independent shots in parallel. Shot `i` draws from
    /// [`Self::shot_rng`]`(seed, i)`, so the result depends only on
    /// `(seed, shots)`.
    pub fn sample(&self, shots: usize, seed: u64) -> Result<GhzRun<T>> {
        if shots == 0 {
            return Err(Error::InvalidParameter("shots must be at least 1".into()));
        }
        let expected_d = self.expected_d()?;
        let records = (0..shots)
            .into_par_iter()
            .map(|i| {
                let mut rng = Self::shot_rng(seed, i);
                let detections = self.shot(&mut rng)?;
                self.record(i, &detections)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GhzRun::from_records(records, expected_d))
    }
}

fn at_step(step: usize, e: Error) -> Error {
    match e {
        Error::Validation { .. } => e,
        other => Error::Validation { step, reason: other.to_string() },
    }
}

/// Validates and runs `steps` once from the initial state.
pub fn run_steps<T: Real, R: Rng + ?Sized>(
    family: AtomFamily,
    cutoff: usize,
    tol: T,
    steps: Vec<ProtocolStep<T>>,
    rng: &mut R,
) -> Result<Trace<T>> {
    Interpreter::new(family, cutoff, tol, steps)?.run(rng)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GhzConfig<T> {
    pub family: AtomFamily,
    pub sign: Sign,
    pub shots: usize,
    pub seed: u64,
    pub cutoff: usize,
    pub tol: T,
}

/// Prepares the GHZ state with the builtin steps and samples `shots` runs of
/// the readout.
pub fn ghz_test<T: Real>(config: &GhzConfig<T>) -> Result<GhzRun<T>> {
    let steps = builtin_steps(config.family, config.sign);
    Interpreter::new(config.family, config.cutoff, config.tol, steps)?.sample(config.shots, config.seed)
}

/// Loads the cavity: source atom in `|f₀⟩`, cavity in `|0⟩`, then the
/// preparation rotation and a resonant π/2 pulse. Returns the state of
/// `(A0, C)`, which ends as `|f₀⟩ (|0⟩ ± |1⟩)/√2`.
pub fn prepare_cavity<T: Real>(sign: Sign, cutoff: usize, tol: T) -> Result<StateVector<T>> {
    let system = CompositeSystem::shared(vec![SubsystemSpec::two_level(SOURCE), SubsystemSpec::fock(CAVITY, cutoff)])?;
    let mut state = StateVector::basis(&system, &["f", "0"])?;
    for u in compile_step(&system, &ProtocolStep::PrepareCavity { sign })? {
        state = state.apply(&u, tol)?;
    }
    Ok(state)
}

/// `(|0⟩ ± |1⟩)/√2` as produced by [`prepare_cavity`], with the source atom
/// factored out.
pub fn cavity_state<T: Real>(sign: Sign, cutoff: usize, tol: T) -> Result<StateVector<T>> {
    prepare_cavity(sign, cutoff, tol)?.factor_out(SOURCE, "f", tol)
}

fn ghz_pair<T: Real>(family: AtomFamily, sign: Sign, cutoff: usize, tol: T) -> Result<StateVector<T>> {
    let atoms = CompositeSystem::shared(vec![family.spec("A1"), family.spec("A2")])?;
    let x = family.initial_label();
    StateVector::basis(&atoms, &[x, x])?.tensor(&cavity_state(sign, cutoff, tol)?)
}

/// Cascade GHZ preparation on `(A1, A2, C)`:
/// `R1`, dispersive π, `R2` on `A1`, then `R3`, dispersive π, `R4` on `A2`.
/// Ends in `(|f₁f₂0⟩ ± |g₁g₂1⟩)/√2`.
pub fn ghz_prepare_cascade<T: Real>(sign: Sign, cutoff: usize, tol: T) -> Result<StateVector<T>> {
    let mut state = ghz_pair(AtomFamily::Cascade, sign, cutoff, tol)?;
    let system = Arc::clone(state.system());
    let disp = cascade_dispersive(DispersivePhase(T::PI()), cutoff)?;
    for (atom, before, after) in [("A1", NamedRotation::R1, NamedRotation::R2), ("A2", NamedRotation::R3, NamedRotation::R4)] {
        state = state.apply(&rotation_on(&system, atom, &before.params())?, tol)?;
        state = state.apply(&disp.clone().on(&[atom, CAVITY])?, tol)?;
        state = state.apply(&rotation_on(&system, atom, &after.params())?, tol)?;
    }
    Ok(state)
}

/// Lambda GHZ preparation on `(A1, A2, C)`: both atoms start in `|b⟩` and
/// cross the cavity dispersively with φ = π. Ends in
/// `(|b₁b₂0⟩ ± |c₁c₂1⟩)/√2`.
pub fn ghz_prepare_lambda<T: Real>(sign: Sign, cutoff: usize, tol: T) -> Result<StateVector<T>> {
    let mut state = ghz_pair(AtomFamily::Lambda, sign, cutoff, tol)?;
    let disp = lambda_dispersive(DispersivePhase(T::PI()), T::zero(), T::zero(), cutoff)?;
    for atom in ["A1", "A2"] {
        state = state.apply(&disp.clone().on(&[atom, CAVITY])?, tol)?;
    }
    Ok(state)
}

/// The ideal GHZ state of a family on `(A1, A2, C)`.
pub fn ghz_target<T: Real>(family: AtomFamily, sign: Sign, cutoff: usize) -> Result<StateVector<T>> {
    let system = CompositeSystem::shared(vec![family.spec("A1"), family.spec("A2"), SubsystemSpec::fock(CAVITY, cutoff)])?;
    let embs = [
        QubitEmbedding::natural(&system, "A1")?,
        QubitEmbedding::natural(&system, "A2")?,
        QubitEmbedding::natural(&system, CAVITY)?,
    ];
    crate::mermin::ghz_state(&system, &embs, sign)
}

/// Transfers the cavity's σx information onto the probe atom: resonant π/2
/// pulse on `(A3, C)`, then `K3` on `A3`. The cavity must have no amplitude
/// above one photon.
pub fn probe_cavity<T: Real>(state: &StateVector<T>, tol: T) -> Result<StateVector<T>> {
    let system = Arc::clone(state.system());
    let pos = system.position(CAVITY)?;
    for (i, a) in state.amplitudes().iter().enumerate() {
        if system.level(i, pos) >= 2 && a.norm() > tol {
            return Err(Error::SupportViolation { index: i, amplitude: a.norm().to_f64() });
        }
    }
    let cutoff = system.subsystem(CAVITY)?.dim();
    let pulse = jc_unitary(&JcParams::resonant(T::one(), T::FRAC_PI_2()), cutoff)?.on(&[PROBE, CAVITY])?;
    let state = state.apply(&pulse, tol)?;
    state.apply(&rotation_on(&system, PROBE, &NamedRotation::K3.params())?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{im, re};
    use std::f64::consts::FRAC_1_SQRT_2;

    const TOL: f64 = 1e-10;

    fn fidelity_ok(a: &StateVector<f64>, b: &StateVector<f64>) -> bool {
        a.fidelity(b).unwrap() >= 1.0 - 1e-10
    }

    #[test]
    fn named_matrices() {
        let s = FRAC_1_SQRT_2;
        let k1 = ramsey(&NamedRotation::K1.params::<f64>());
        let expected = crate::linalg::CMatrix::from_rows(&[&[re(s), re(-s)], &[re(s), re(s)]]);
        assert!(k1.matrix().max_abs_diff(&expected) < 1e-15);
        let r0 = ramsey(&NamedRotation::R0.params::<f64>());
        let expected = crate::linalg::CMatrix::from_rows(&[&[re(s), im(s)], &[im(s), re(s)]]);
        assert!(r0.matrix().max_abs_diff(&expected) < 1e-15);
        for r in NamedRotation::ALL {
            assert_eq!(r.to_string().parse::<NamedRotation>().unwrap(), r);
        }
        assert!("R5".parse::<NamedRotation>().is_err());
    }

    #[test]
    fn cavity_preparation() {
        for (sign, s) in [(Sign::Plus, 1.0), (Sign::Minus, -1.0)] {
            let state = prepare_cavity::<f64>(sign, 4, TOL).unwrap();
            let target = StateVector::superposition(
                state.system(),
                &[(re(1.0), &["f", "0"][..]), (re(s), &["f", "1"][..])],
            )
            .unwrap();
            assert!(fidelity_ok(&state, &target), "{sign}");
        }
    }

    #[test]
    fn preparation_intermediate_after_r0() {
        let system = CompositeSystem::shared(vec![SubsystemSpec::two_level(SOURCE), SubsystemSpec::fock(CAVITY, 3)]).unwrap();
        let state = StateVector::<f64>::basis(&system, &["f", "0"]).unwrap();
        let after = state.apply(&rotation_on(&system, SOURCE, &NamedRotation::R0.params()).unwrap(), TOL).unwrap();
        let target =
            StateVector::superposition(&system, &[(im(1.0), &["e", "0"][..]), (re(1.0), &["f", "0"][..])]).unwrap();
        assert!((after.inner(&target).unwrap() - re(1.0)).norm() < 1e-12);
    }

    #[test]
    fn ghz_preparations_reach_targets() {
        for cutoff in [2, 4, 8] {
            for sign in [Sign::Plus, Sign::Minus] {
                let c = ghz_prepare_cascade::<f64>(sign, cutoff, TOL).unwrap();
                assert!(fidelity_ok(&c, &ghz_target(AtomFamily::Cascade, sign, cutoff).unwrap()));
                let l = ghz_prepare_lambda::<f64>(sign, cutoff, TOL).unwrap();
                assert!(fidelity_ok(&l, &ghz_target(AtomFamily::Lambda, sign, cutoff).unwrap()));
            }
        }
    }

    #[test]
    fn lambda_intermediate_after_first_atom() {
        let state = ghz_pair::<f64>(AtomFamily::Lambda, Sign::Plus, 4, TOL).unwrap();
        let disp = lambda_dispersive(DispersivePhase(std::f64::consts::PI), 0.0, 0.0, 4).unwrap();
        let after = state.apply(&disp.on(&["A1", CAVITY]).unwrap(), TOL).unwrap();
        let target = StateVector::superposition(
            state.system(),
            &[(re(1.0), &["b", "b", "0"][..]), (re(-1.0), &["c", "b", "1"][..])],
        )
        .unwrap();
        assert!((after.inner(&target).unwrap() - re(1.0)).norm() < 1e-12);
    }

    fn probe_system() -> Arc<CompositeSystem> {
        CompositeSystem::shared(vec![SubsystemSpec::two_level_labeled(PROBE, "f", "g"), SubsystemSpec::fock(CAVITY, 4)])
            .unwrap()
    }

    #[test]
    fn probe_maps_cavity_parity_onto_atom() {
        let sys = probe_system();
        let plus = StateVector::<f64>::superposition(&sys, &[(re(1.0), &["g", "0"][..]), (re(1.0), &["g", "1"][..])]).unwrap();
        let out = probe_cavity(&plus, TOL).unwrap();
        assert!((out.amplitude(&["g", "0"]).unwrap() - re(1.0)).norm() < 1e-12);
        let minus = StateVector::<f64>::superposition(&sys, &[(re(1.0), &["g", "0"][..]), (re(-1.0), &["g", "1"][..])]).unwrap();
        let out = probe_cavity(&minus, TOL).unwrap();
        assert!((out.amplitude(&["f", "0"]).unwrap() - im(1.0)).norm() < 1e-12);
        let vacuum = StateVector::<f64>::basis(&sys, &["g", "0"]).unwrap();
        let out = probe_cavity(&vacuum, TOL).unwrap();
        assert!((out.amplitude(&["g", "0"]).unwrap() - re(FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!((out.amplitude(&["f", "0"]).unwrap() - im(FRAC_1_SQRT_2)).norm() < 1e-12);
        let two = StateVector::<f64>::basis(&sys, &["g", "2"]).unwrap();
        assert!(matches!(probe_cavity(&two, TOL), Err(Error::SupportViolation { .. })));
    }

    #[test]
    fn resonant_probe_exchange() {
        let sys = probe_system();
        let g1 = StateVector::<f64>::basis(&sys, &["g", "1"]).unwrap();
        let u = jc_unitary(&JcParams::resonant(1.0, std::f64::consts::FRAC_PI_2), 4).unwrap().on(&[PROBE, CAVITY]).unwrap();
        let out = g1.apply(&u, TOL).unwrap();
        assert!((out.amplitude(&["f", "0"]).unwrap() - im(-1.0)).norm() < 1e-12);
    }

    #[test]
    fn interpreter_matches_direct_preparation() {
        for family in [AtomFamily::Cascade, AtomFamily::Lambda] {
            for sign in [Sign::Plus, Sign::Minus] {
                let it = Interpreter::<f64>::new(family, 4, TOL, builtin_steps(family, sign)).unwrap();
                let prepared = it
                    .readout_state()
                    .factor_out(SOURCE, "f", TOL)
                    .unwrap()
                    .factor_out(PROBE, "g", TOL)
                    .unwrap();
                let direct = match family {
                    AtomFamily::Cascade => ghz_prepare_cascade::<f64>(sign, 4, TOL).unwrap(),
                    AtomFamily::Lambda => ghz_prepare_lambda::<f64>(sign, 4, TOL).unwrap(),
                };
                assert!(fidelity_ok(&prepared, &direct));
                assert!((it.expected_d().unwrap() - sign.as_real::<f64>()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ghz_test_products_and_branches() {
        for family in [AtomFamily::Cascade, AtomFamily::Lambda] {
            for sign in [Sign::Plus, Sign::Minus] {
                let config = GhzConfig { family, sign, shots: 400, seed: 7, cutoff: 4, tol: TOL };
                let run = ghz_test::<f64>(&config).unwrap();
                assert!(run.passed(TOL));
                assert!(run.records.iter().all(|r| r.product == sign.value()));
                let table = table_branches(family, sign);
                for key in run.histogram.keys() {
                    assert!(table.iter().any(|row| row.iter().zip(key).all(|(a, b)| a == b)), "{key:?}");
                }
                assert_eq!(run.histogram.values().sum::<usize>(), 400);
            }
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let it = Interpreter::<f64>::new(AtomFamily::Cascade, 4, TOL, builtin_steps(AtomFamily::Cascade, Sign::Plus)).unwrap();
        let a = it.sample(64, 11).unwrap();
        let b = it.sample(64, 11).unwrap();
        assert_eq!(a.records, b.records);
        let c = it.sample(64, 12).unwrap();
        assert_ne!(a.records, c.records);
        assert!(matches!(it.sample(0, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn empty_step_list_keeps_initial_state() {
        let mut rng = Interpreter::<f64>::shot_rng(0, 0);
        let trace = run_steps::<f64, _>(AtomFamily::Lambda, 4, TOL, Vec::new(), &mut rng).unwrap();
        assert_eq!(trace.states.len(), 1);
        assert_eq!(trace.states[0], initial_state(AtomFamily::Lambda, 4).unwrap());
        assert!(trace.detections.is_empty());
    }

    #[test]
    fn run_trace_has_one_state_per_step() {
        let steps = builtin_steps::<f64>(AtomFamily::Cascade, Sign::Minus);
        let n = steps.len();
        let mut rng = Interpreter::<f64>::shot_rng(3, 0);
        let trace = run_steps(AtomFamily::Cascade, 4, TOL, steps, &mut rng).unwrap();
        assert_eq!(trace.states.len(), n + 1);
        assert_eq!(trace.detections.len(), 3);
        let eigs: i8 = trace
            .detections
            .iter()
            .map(|d| {
                let spec = trace.states[0].system().subsystem(&d.atom).unwrap().clone();
                detection_eigenvalue(&spec, spec.label_index(&d.label).unwrap())
            })
            .product();
        assert_eq!(eigs, -1);
    }

    #[test]
    fn validation_rules() {
        let detect = |a: &str| ProtocolStep::<f64>::Detect { atom: a.into() };
        let disp = |a: &str| ProtocolStep::<f64>::DispersiveInteract { atom: a.into(), phi: 1.0 };
        let new = |steps| Interpreter::<f64>::new(AtomFamily::Cascade, 4, TOL, steps).err();

        assert!(matches!(new(vec![detect("A1")]), Some(Error::Validation { step: 0, .. })));
        assert!(matches!(new(vec![disp("A1"), detect("A1"), detect("A1")]), Some(Error::Validation { step: 2, .. })));
        assert!(matches!(new(vec![disp("A1"), detect("A1"), disp("A1")]), Some(Error::Validation { step: 2, .. })));
        assert!(matches!(new(vec![disp("A9")]), Some(Error::Validation { step: 0, .. })));
        assert!(matches!(new(vec![disp("C")]), Some(Error::Validation { step: 0, .. })));
        let resonant = ProtocolStep::ResonantInteract { atom: "A1".into(), gt: 1.0 };
        assert!(matches!(new(vec![resonant]), Some(Error::Validation { step: 0, .. })));
        let negative = ProtocolStep::ResonantInteract { atom: PROBE.into(), gt: -1.0 };
        assert!(matches!(new(vec![negative]), Some(Error::Validation { step: 0, .. })));
        assert!(new(vec![disp("A1"), detect("A1")]).is_none());
    }

    #[test]
    fn support_violation_is_reported_with_step() {
        // With cutoff 2 the second loading pushes |e,1⟩ into the frozen sector.
        let steps = vec![
            ProtocolStep::<f64>::PrepareCavity { sign: Sign::Plus },
            ProtocolStep::PrepareCavity { sign: Sign::Plus },
            ProtocolStep::PrepareCavity { sign: Sign::Plus },
        ];
        let err = Interpreter::<f64>::new(AtomFamily::Cascade, 2, TOL, steps).err().unwrap();
        assert!(matches!(err, Error::Validation { step: 1, .. }), "{err}");
    }

    #[test]
    fn outcome_labels_and_eigenvalues() {
        assert_eq!(outcome_label("A1", "g"), "g1");
        assert_eq!(outcome_label(PROBE, "f"), "f3");
        let cascade = SubsystemSpec::cascade("A1");
        assert_eq!(detection_eigenvalue(&cascade, 2), 1);
        assert_eq!(detection_eigenvalue(&cascade, 1), -1);
        assert_eq!(detection_eigenvalue(&cascade, 0), 0);
        let lambda = SubsystemSpec::lambda("A1");
        assert_eq!(detection_eigenvalue(&lambda, 2), 1);
        assert_eq!(detection_eigenvalue(&lambda, 1), -1);
        let probe = SubsystemSpec::two_level_labeled(PROBE, "f", "g");
        assert_eq!(detection_eigenvalue(&probe, 1), 1);
    }
}
