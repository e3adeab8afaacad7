//! Invariant suite behind `cavity-ghz verify`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::sync::Arc;

use cavity_ghz::dynamics::{
    cascade_dispersive, dispersive_hamiltonian, jc_dispersive, jc_dispersive_error, jc_unitary,
    lambda_classical_rotation, lambda_dispersive, lambda_dispersive_error, lambda_exact_degenerate,
    lambda_exact_nondegenerate, ramsey, su2_compose, su2_decompose, DispersivePhase, JcParams, LambdaParams,
};
use cavity_ghz::mermin::{build_mermin, commutator_norm, embedded_projector, expectation, lhv_ledger};
use cavity_ghz::protocol::{cavity_state, ghz_target, table_branches};
use cavity_ghz::{
    ghz_prepare_cascade, ghz_prepare_lambda, ghz_test, AtomFamily, CMatrix64, CompositeSystem, GhzConfig,
    NamedRotation, QubitEmbedding, Sign, StateVector64, SubsystemSpec, C64,
};

pub const ALGEBRA_TOL: f64 = 1e-12;
pub const STATE_TOL: f64 = 1e-10;
pub const DETUNINGS: [f64; 3] = [50.0, 100.0, 200.0];
pub const JC_CONVERGENCE_BOUND: f64 = 5.0;
pub const LAMBDA_CONVERGENCE_BOUND: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, bound, pass: value <= bound }
    }

    fn exact(name: impl Into<String>, value: f64, expected: f64) -> Self {
        Self { name: name.into(), value, bound: expected, pass: value == expected }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{} = {:.3e} (bound {:.1e}) {verdict}", self.name, self.value, self.bound)
    }
}

/// Deliberate corruption used to exercise the failure path.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    pub perturb_mermin: bool,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn mat(rows: [[C64; 2]; 2]) -> CMatrix64 {
    CMatrix64::from_rows(&[&rows[0], &rows[1]])
}

fn unitarity(checks: &mut Vec<Check>) {
    let mut worst_jc: f64 = 0.0;
    let mut worst_lambda: f64 = 0.0;
    let mut worst_dispersive: f64 = 0.0;
    for g in [0.3, 1.0, 2.2] {
        for delta in [-3.0, 0.0, 0.7, 40.0] {
            for t in [0.2, 1.9, 7.5] {
                for cutoff in [2, 5] {
                    worst_jc = worst_jc.max(jc_unitary(&JcParams { g, delta, t }, cutoff).unwrap().unitarity_deviation());
                    let p = LambdaParams { g1: C64::from_polar(g, 0.4), g2: C64::from_polar(0.6, -1.1), delta, t };
                    worst_lambda = worst_lambda
                        .max(lambda_exact_degenerate(&p, cutoff).unwrap().unitarity_deviation())
                        .max(lambda_exact_nondegenerate(&p, (cutoff, 3)).unwrap().unitarity_deviation());
                    let phase = DispersivePhase(g * t);
                    worst_dispersive = worst_dispersive
                        .max(jc_dispersive(phase, cutoff).unwrap().unitarity_deviation())
                        .max(cascade_dispersive(phase, cutoff).unwrap().unitarity_deviation())
                        .max(lambda_dispersive(phase, delta, t, cutoff).unwrap().unitarity_deviation());
                }
            }
        }
    }
    checks.push(Check::at_most("unitarity sweep, Jaynes-Cummings max ‖U†U-1‖", worst_jc, ALGEBRA_TOL));
    checks.push(Check::at_most("unitarity sweep, exact lambda max ‖U†U-1‖", worst_lambda, ALGEBRA_TOL));
    checks.push(Check::at_most("unitarity sweep, dispersive operators max ‖U†U-1‖", worst_dispersive, ALGEBRA_TOL));
}

fn spot_checks(checks: &mut Vec<Check>) {
    let u = jc_unitary(&JcParams::resonant(1.0, FRAC_PI_2), 4).unwrap();
    // |e,0⟩ is index 0, |f,1⟩ is index 4 + 1.
    checks.push(Check::at_most("resonant |e,0⟩ → -i|f,1⟩ error", (u.matrix()[(5, 0)] - c(0.0, -1.0)).norm(), ALGEBRA_TOL));
    let probe = u.clone().on(&["A3", "C"]).unwrap();
    let sys = CompositeSystem::shared(vec![SubsystemSpec::two_level_labeled("A3", "f", "g"), SubsystemSpec::fock("C", 4)]).unwrap();
    let out = StateVector64::basis(&sys, &["g", "1"]).unwrap().apply(&probe, STATE_TOL).unwrap();
    let amp = out.amplitude(&["f", "0"]).unwrap();
    checks.push(Check::at_most("resonant |g₃,1⟩ → -i|f₃,0⟩ error", (amp - c(0.0, -1.0)).norm(), ALGEBRA_TOL));

    let s = FRAC_1_SQRT_2;
    let e = C64::from_polar(s, FRAC_PI_4);
    let cases = [
        ("π/2,π/2", FRAC_PI_2, FRAC_PI_2, mat([[e, -e], [e, e]])),
        ("π,π/2", PI, FRAC_PI_2, mat([[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])),
        ("π,-π/2", PI, -FRAC_PI_2, mat([[c(0.0, 0.0), c(0.0, 1.0)], [c(0.0, -1.0), c(0.0, 0.0)]])),
        ("π,π", PI, PI, mat([[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])),
    ];
    for (name, phi, rel, expected) in cases {
        let m = lambda_classical_rotation(phi, rel);
        checks.push(Check::at_most(format!("classical limit ({name}) matrix error"), m.matrix().max_abs_diff(&expected), ALGEBRA_TOL));
    }
    let k = ramsey(&NamedRotation::K1.params::<f64>());
    let phased = lambda_classical_rotation(FRAC_PI_2, FRAC_PI_2).matrix().scale(C64::from_polar(1.0, -FRAC_PI_4));
    checks.push(Check::at_most("classical limit (π/2,π/2) vs e^{iπ/4}·K1 error", phased.max_abs_diff(k.matrix()), ALGEBRA_TOL));

    let mut worst: f64 = 0.0;
    for r in NamedRotation::ALL {
        let m = ramsey(&r.params::<f64>());
        let p = su2_decompose(m.matrix(), STATE_TOL).unwrap();
        worst = worst.max(su2_compose(&p).max_abs_diff(m.matrix()));
    }
    checks.push(Check::at_most("SU(2) round trip of named rotations", worst, STATE_TOL));
}

fn convergence(checks: &mut Vec<Check>) {
    let worst = |f: fn(f64, f64, f64, usize) -> cavity_ghz::Result<f64>| {
        DETUNINGS.iter().map(|&r| f(1.0, r, FRAC_PI_4, 2).unwrap() * r).fold(0.0, f64::max)
    };
    checks.push(Check::at_most(
        "dispersive convergence max ‖U_JC-U_d‖·Δ/g over Δ/g ∈ {50,100,200}",
        worst(jc_dispersive_error),
        JC_CONVERGENCE_BOUND,
    ));
    checks.push(Check::at_most(
        "dispersive convergence max ‖U_Λ-U_d‖·Δ/g over Δ/g ∈ {50,100,200}",
        worst(lambda_dispersive_error),
        LAMBDA_CONVERGENCE_BOUND,
    ));

    let (g, delta, t, cutoff) = (1.0, 60.0, 2.0, 5);
    let phi = g * g * t / delta;
    let evolved = dispersive_hamiltonian(g * g / delta, cutoff).unwrap().scale(c(0.0, -t)).expm();
    let pe: Vec<C64> = (0..2 * cutoff).map(|i| if i < cutoff { C64::from_polar(1.0, -phi) } else { c(1.0, 0.0) }).collect();
    let expected = &CMatrix64::from_diagonal(&pe) * &evolved;
    let u = jc_dispersive(DispersivePhase(phi), cutoff).unwrap();
    checks.push(Check::at_most("dispersive operator vs exp(-iH_d t) error", u.matrix().max_abs_diff(&expected), ALGEBRA_TOL));
}

fn mermin_system(family: AtomFamily) -> (Arc<CompositeSystem>, [QubitEmbedding; 3]) {
    let spec = match family {
        AtomFamily::Cascade => SubsystemSpec::cascade,
        AtomFamily::Lambda => SubsystemSpec::lambda,
    };
    let sys = CompositeSystem::shared(vec![spec("A1"), spec("A2"), SubsystemSpec::fock("C", 4)]).unwrap();
    let embs = ["A1", "A2", "C"].map(|n| QubitEmbedding::natural(&sys, n).unwrap());
    (sys, embs)
}

fn mermin(checks: &mut Vec<Check>, faults: Faults) {
    for family in [AtomFamily::Cascade, AtomFamily::Lambda] {
        let (sys, embs) = mermin_system(family);
        let mut m = build_mermin::<f64>(&sys, &embs).unwrap();
        if faults.perturb_mermin {
            m.a[(0, 1)] += c(1e-3, 0.0);
        }
        let f = family.name();
        checks.push(Check::at_most(format!("commutator ‖[A,B]‖ ({f})"), commutator_norm(&m.a, &m.b), ALGEBRA_TOL));
        checks.push(Check::at_most(format!("commutator ‖[A,C]‖ ({f})"), commutator_norm(&m.a, &m.c), ALGEBRA_TOL));
        checks.push(Check::at_most(format!("commutator ‖[B,C]‖ ({f})"), commutator_norm(&m.b, &m.c), ALGEBRA_TOL));
        let proj = embedded_projector::<f64>(&sys, &embs).unwrap();
        let ops = [&m.a, &m.b, &m.c, &m.d];
        let herm = ops.iter().map(|o| o.hermiticity_deviation()).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{f} Mermin operators max Hermiticity deviation"), herm, ALGEBRA_TOL));
        let square = ops.iter().map(|o| (*o * *o).max_abs_diff(&proj)).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("{f} Mermin operators max ‖X²-P‖"), square, ALGEBRA_TOL));
        let abc = &(&m.a * &m.b) * &m.c;
        checks.push(Check::at_most(format!("{f} ‖D+ABC‖"), (&m.d + &abc).max_abs(), ALGEBRA_TOL));
        for sign in [Sign::Plus, Sign::Minus] {
            let psi = ghz_target::<f64>(family, sign, 4).unwrap();
            let s = sign.as_real::<f64>();
            let ev = |op: &CMatrix64| expectation(op, &psi, STATE_TOL).unwrap_or(f64::NAN);
            let abc_err = [&m.a, &m.b, &m.c].iter().map(|o| (ev(o) + s).abs()).fold(0.0, f64::max);
            checks.push(Check::at_most(format!("{f} GHZ{sign} max |⟨A,B,C⟩ - ({})|", -sign.value()), abc_err, STATE_TOL));
            checks.push(Check::at_most(format!("{f} GHZ{sign} |⟨D⟩ - ({})|", sign.value()), (ev(&m.d) - s).abs(), STATE_TOL));
        }
    }
    for sign in [Sign::Plus, Sign::Minus] {
        let r = lhv_ledger(sign);
        let name = format!(
            "LHV scan sign={sign}: {} assignments, {} reproduce a=b=c={}, counterexamples",
            r.assignments,
            r.consistent.len(),
            -sign.value()
        );
        checks.push(Check::exact(name, r.counterexamples as f64, 0.0));
    }
}

fn preparation(checks: &mut Vec<Check>) {
    for sign in [Sign::Plus, Sign::Minus] {
        let cav = cavity_state::<f64>(sign, 4, STATE_TOL).unwrap();
        let target = StateVector64::superposition(
            cav.system(),
            &[(c(1.0, 0.0), &["0"][..]), (c(sign.as_real(), 0.0), &["1"][..])],
        )
        .unwrap();
        checks.push(Check::at_most(format!("cavity preparation {sign} infidelity"), 1.0 - cav.fidelity(&target).unwrap(), STATE_TOL));
        for cutoff in [2, 4, 8] {
            let casc = ghz_prepare_cascade::<f64>(sign, cutoff, STATE_TOL).unwrap();
            let t = ghz_target(AtomFamily::Cascade, sign, cutoff).unwrap();
            checks.push(Check::at_most(
                format!("cascade GHZ{sign} preparation infidelity (cutoff {cutoff})"),
                1.0 - casc.fidelity(&t).unwrap(),
                STATE_TOL,
            ));
            let lam = ghz_prepare_lambda::<f64>(sign, cutoff, STATE_TOL).unwrap();
            let t = ghz_target(AtomFamily::Lambda, sign, cutoff).unwrap();
            checks.push(Check::at_most(
                format!("lambda GHZ{sign} preparation infidelity (cutoff {cutoff})"),
                1.0 - lam.fidelity(&t).unwrap(),
                STATE_TOL,
            ));
        }
    }
}

fn sampling(checks: &mut Vec<Check>) {
    for family in [AtomFamily::Cascade, AtomFamily::Lambda] {
        for sign in [Sign::Plus, Sign::Minus] {
            let config = GhzConfig { family, sign, shots: 1000, seed: 0, cutoff: 4, tol: STATE_TOL };
            let run = ghz_test::<f64>(&config).unwrap();
            let table = table_branches(family, sign);
            let wrong = run
                .records
                .iter()
                .filter(|r| r.product != sign.value() || !table.iter().any(|row| row.iter().zip(&r.labels).all(|(a, b)| a == b)))
                .count();
            checks.push(Check::exact(format!("{family} GHZ{sign} test, 1000 shots, off-table or wrong-product shots"), wrong as f64, 0.0));
        }
    }
}

/// Runs every check in order.
pub fn run_checks(faults: Faults) -> Vec<Check> {
    let mut checks = Vec::new();
    unitarity(&mut checks);
    spot_checks(&mut checks);
    convergence(&mut checks);
    mermin(&mut checks, faults);
    preparation(&mut checks);
    sampling(&mut checks);
    checks
}
