//! Closed-form evolution operators against brute-force `e^{iH0t} e^{-iHt}`.

use cavity_ghz::dynamics::{
    jc_unitary, lambda_exact_degenerate, lambda_exact_nondegenerate, JcParams, LambdaParams,
};
use cavity_ghz::{CMatrix64, C64};
use proptest::prelude::*;

const MODE_FREQ: f64 = 2.0;
const LOWER_FREQ: f64 = 0.3;

fn projector(dim: usize, i: usize, j: usize) -> CMatrix64 {
    CMatrix64::from_fn(dim, dim, |r, c| if (r, c) == (i, j) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

fn annihilation(cutoff: usize) -> CMatrix64 {
    CMatrix64::from_fn(cutoff, cutoff, |r, c| {
        if c == r + 1 { C64::new((c as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
    })
}

fn number(cutoff: usize) -> CMatrix64 {
    CMatrix64::from_diagonal(&(0..cutoff).map(|n| C64::new(n as f64, 0.0)).collect::<Vec<_>>())
}

fn interaction_picture(h0: &CMatrix64, hi: &CMatrix64, t: f64) -> CMatrix64 {
    let total = h0 + hi;
    &h0.scale(C64::new(0.0, t)).expm() * &total.scale(C64::new(0.0, -t)).expm()
}

fn plus_adjoint(v: &CMatrix64) -> CMatrix64 {
    v + &v.adjoint()
}

fn jc_oracle(g: f64, delta: f64, t: f64, cutoff: usize) -> CMatrix64 {
    let id_mode = CMatrix64::identity(cutoff);
    let upper = MODE_FREQ + delta + LOWER_FREQ;
    let h0 = &(&CMatrix64::identity(2).kron(&number(cutoff)).scale(C64::new(MODE_FREQ, 0.0))
        + &projector(2, 0, 0).kron(&id_mode).scale(C64::new(upper, 0.0)))
        + &projector(2, 1, 1).kron(&id_mode).scale(C64::new(LOWER_FREQ, 0.0));
    let v = projector(2, 0, 1).kron(&annihilation(cutoff)).scale(C64::new(g, 0.0));
    interaction_picture(&h0, &plus_adjoint(&v), t)
}

fn lambda_h0(delta: f64, mode_number: &CMatrix64) -> CMatrix64 {
    let n = mode_number.rows();
    let id = CMatrix64::identity(n);
    let upper = MODE_FREQ + delta + LOWER_FREQ;
    let lower = &projector(3, 1, 1) + &projector(3, 2, 2);
    &(&CMatrix64::identity(3).kron(&mode_number.scale(C64::new(MODE_FREQ, 0.0)))
        + &projector(3, 0, 0).kron(&id).scale(C64::new(upper, 0.0)))
        + &lower.kron(&id).scale(C64::new(LOWER_FREQ, 0.0))
}

fn lambda_degenerate_oracle(p: &LambdaParams<f64>, cutoff: usize) -> CMatrix64 {
    let h0 = lambda_h0(p.delta, &number(cutoff));
    let a = annihilation(cutoff);
    let v = &projector(3, 0, 1).scale(p.g1).kron(&a) + &projector(3, 0, 2).scale(p.g2).kron(&a);
    interaction_picture(&h0, &plus_adjoint(&v), p.t)
}

fn lambda_nondegenerate_oracle(p: &LambdaParams<f64>, c1: usize, c2: usize) -> CMatrix64 {
    let (i1, i2) = (CMatrix64::identity(c1), CMatrix64::identity(c2));
    let total_number = &number(c1).kron(&i2) + &i1.kron(&number(c2));
    let h0 = lambda_h0(p.delta, &total_number);
    let a1 = annihilation(c1).kron(&i2);
    let a2 = i1.kron(&annihilation(c2));
    let v = &projector(3, 0, 1).scale(p.g1).kron(&a1) + &projector(3, 0, 2).scale(p.g2).kron(&a2);
    interaction_picture(&h0, &plus_adjoint(&v), p.t)
}

fn coupling() -> impl Strategy<Value = C64> {
    (0.1f64..1.5, -3.2f64..3.2).prop_map(|(r, phase)| C64::from_polar(r, phase))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jc_matches_hamiltonian(g in 0.05f64..2.0, delta in -3.0f64..3.0, t in 0.0f64..3.0, cutoff in 2usize..6) {
        let closed = jc_unitary(&JcParams { g, delta, t }, cutoff).unwrap();
        let brute = jc_oracle(g, delta, t, cutoff);
        prop_assert!(closed.matrix().max_abs_diff(&brute) < 1e-9);
    }

    #[test]
    fn lambda_degenerate_matches_hamiltonian(
        g1 in coupling(), g2 in coupling(), delta in -3.0f64..3.0, t in 0.0f64..2.5, cutoff in 2usize..5,
    ) {
        let p = LambdaParams { g1, g2, delta, t };
        let closed = lambda_exact_degenerate(&p, cutoff).unwrap();
        let brute = lambda_degenerate_oracle(&p, cutoff);
        prop_assert!(closed.matrix().max_abs_diff(&brute) < 1e-9);
    }

    #[test]
    fn lambda_nondegenerate_matches_hamiltonian_on_support(
        g1 in coupling(), g2 in coupling(), delta in -3.0f64..3.0, t in 0.0f64..2.5,
        c1 in 2usize..4, c2 in 2usize..4,
    ) {
        let p = LambdaParams { g1, g2, delta, t };
        let closed = lambda_exact_nondegenerate(&p, (c1, c2)).unwrap();
        let brute = lambda_nondegenerate_oracle(&p, c1, c2);
        let support = closed.support().unwrap();
        let diff = &closed.matrix().submatrix(support) - &brute.submatrix(support);
        prop_assert!(diff.max_abs() < 1e-9);
    }
}
