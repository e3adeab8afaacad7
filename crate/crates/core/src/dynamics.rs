//! Evolution operators and rotation matrices for atoms crossing a cavity.
//!
//! The field-dependent operators are assembled sector by sector: the
//! interaction conserves the number of excitations, so every closed-form
//! operator expression in `a`, `a†` reduces to scalars on a small block of
//! basis states (`{|e,n⟩, |f,n+1⟩}` for a two-level atom, `{|a,n⟩, |b,n+1⟩,
//! |c,n+1⟩}` for a lambda atom). The block that would need photon number
//! `cutoff` is left as identity and dropped from the operator's support.
//!
//! All operators are in the interaction picture. Matrix rows and columns are
//! ordered `(e, f)`, `(e, f, g)` and `(a, b, c)` for the atom, then by photon
//! number.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hilbert::Unitary;
use crate::linalg::CMatrix;
use crate::scalar::{cis, im, re, sinc_t, Real};

/// Two-level atom coupled to one mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JcParams<T> {
    /// Vacuum Rabi coupling (rad/s).
    pub g: T,
    /// Atomic transition frequency minus mode frequency (rad/s).
    pub delta: T,
    /// Interaction time (s).
    pub t: T,
}

impl<T: Real> JcParams<T> {
    pub fn resonant(g: T, t: T) -> Self {
        Self { g, delta: T::zero(), t }
    }

    fn validate(&self) -> Result<()> {
        if !(self.g > T::zero()) || !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!("coupling g = {} must be positive", self.g)));
        }
        if !(self.t >= T::zero()) || !self.t.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid time {} or detuning {}", self.t, self.delta)));
        }
        Ok(())
    }
}

/// Classical driving field: phase `theta` and pulse area `chi = g η t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RamseyParams<T> {
    pub theta: T,
    pub chi: T,
}

/// Lambda atom coupled through its upper level: `g1` on `a ↔ b`, `g2` on
/// `a ↔ c`, common detuning `delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaParams<T> {
    pub g1: Complex<T>,
    pub g2: Complex<T>,
    pub delta: T,
    pub t: T,
}

impl<T: Real> LambdaParams<T> {
    fn validate(&self) -> Result<()> {
        let total = self.g1.norm_sqr() + self.g2.norm_sqr();
        if !(total > T::zero()) || !total.is_finite() {
            return Err(Error::InvalidParameter("lambda couplings must not both vanish".into()));
        }
        if !(self.t >= T::zero()) || !self.t.is_finite() || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid time {} or detuning {}", self.t, self.delta)));
        }
        Ok(())
    }
}

/// Accumulated dispersive phase.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DispersivePhase<T>(pub T);

impl<T: Real> DispersivePhase<T> {
    /// `g² τ / Δ`, the phase per photon for a two-level or cascade atom.
    pub fn two_level(g: T, tau: T, delta: T) -> Self {
        Self(g * g * tau / delta)
    }

    /// `2 g² τ / Δ`, the phase per photon for a lambda atom with `|g1| = |g2| = g`.
    pub fn lambda(g: T, tau: T, delta: T) -> Self {
        Self(T::lit(2.0) * g * g * tau / delta)
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        Err(Error::InvalidParameter(format!("cutoff {cutoff} must be at least 2")))
    } else {
        Ok(())
    }
}

/// Closed-form evolution of one coupled sector `{|a⟩, |b⟩, |c⟩}` where the
/// upper state `|a⟩` couples to `|b⟩` with amplitude `xb` and to `|c⟩` with
/// `xc` (`⟨a|H|b⟩ = xb`). Rows and columns ordered `(a, b, c)`.
fn lambda_sector<T: Real>(xb: Complex<T>, xc: Complex<T>, delta: T, t: T) -> [[Complex<T>; 3]; 3] {
    let half = delta / T::lit(2.0);
    let g2 = xb.norm_sqr() + xc.norm_sqr();
    let root = (half * half + g2).sqrt();
    let sinc = sinc_t(root, t);
    let cos = (root * t).cos();
    let up = cis(half * t);
    let down = cis(-half * t);

    let aa = up * Complex::new(cos, -half * sinc);
    let ab = im(-sinc) * up * xb;
    let ac = im(-sinc) * up * xc;
    let ba = im(-sinc) * down * xb.conj();
    let ca = im(-sinc) * down * xc.conj();
    // Bright-state factor e^{-iΔt/2}(cos + iΔ/2 sinc) - 1; the dark combination
    // of b and c is untouched.
    let bright = down * Complex::new(cos, half * sinc) - Complex::one();
    let one = Complex::<T>::one();
    let (bb, bc, cb, cc) = if g2 > T::zero() {
        (
            one + bright * (xb.norm_sqr() / g2),
            bright * xb.conj() * xc / g2,
            bright * xc.conj() * xb / g2,
            one + bright * (xc.norm_sqr() / g2),
        )
    } else {
        (one, Complex::zero(), Complex::zero(), one)
    };
    [[aa, ab, ac], [ba, bb, bc], [ca, cb, cc]]
}

/// Resonant or detuned Jaynes-Cummings evolution on `(two-level atom, mode)`.
pub fn jc_unitary<T: Real>(p: &JcParams<T>, cutoff: usize) -> Result<Unitary<T>> {
    p.validate()?;
    check_cutoff(cutoff)?;
    let idx = |atom: usize, n: usize| atom * cutoff + n;
    let (e, f) = (0, 1);
    let mut m = CMatrix::identity(2 * cutoff);

    // |f,0⟩ has no partner; its element is the ν(n=0) expression, which is 1.
    let half = p.delta / T::lit(2.0);
    let nu0 = half.abs();
    m[(idx(f, 0), idx(f, 0))] = cis(-half * p.t) * Complex::new((nu0 * p.t).cos(), half * sinc_t(nu0, p.t));

    for n in 0..cutoff - 1 {
        let x = re(p.g * T::lit((n + 1) as f64).sqrt());
        let s = lambda_sector(x, Complex::zero(), p.delta, p.t);
        let (ie, jf) = (idx(e, n), idx(f, n + 1));
        m[(ie, ie)] = s[0][0];
        m[(ie, jf)] = s[0][1];
        m[(jf, ie)] = s[1][0];
        m[(jf, jf)] = s[1][1];
    }
    let top = idx(e, cutoff - 1);
    let support = (0..2 * cutoff).filter(|&i| i != top).collect();
    Unitary::new(vec![2, cutoff], m, Some(support))
}

/// Large-detuning limit of [`jc_unitary`]:
/// `|e,n⟩ → e^{-iφ(n+1)} |e,n⟩`, `|f,n⟩ → e^{iφn} |f,n⟩`.
pub fn jc_dispersive<T: Real>(phi: DispersivePhase<T>, cutoff: usize) -> Result<Unitary<T>> {
    check_cutoff(cutoff)?;
    let mut diag = Vec::with_capacity(2 * cutoff);
    for n in 0..cutoff {
        diag.push(cis(-phi.0 * T::lit((n + 1) as f64)));
    }
    for n in 0..cutoff {
        diag.push(cis(phi.0 * T::lit(n as f64)));
    }
    Unitary::new(vec![2, cutoff], CMatrix::from_diagonal(&diag), None)
}

/// Dispersive Hamiltonian `(g²/Δ) a†a (|e⟩⟨e| - |f⟩⟨f|)` in units of ħ, on
/// `(two-level atom, mode)`.
pub fn dispersive_hamiltonian<T: Real>(g_sq_over_delta: T, cutoff: usize) -> Result<CMatrix<T>> {
    check_cutoff(cutoff)?;
    let mut diag = Vec::with_capacity(2 * cutoff);
    for sign in [T::one(), -T::one()] {
        for n in 0..cutoff {
            diag.push(re(sign * g_sq_over_delta * T::lit(n as f64)));
        }
    }
    Ok(CMatrix::from_diagonal(&diag))
}

/// Effective cascade-atom operator `e^{iφa†a}|f⟩⟨f| + |g⟩⟨g|`.
///
/// The upper level `e` only mediates the virtual transition; its rows are
/// identity and outside the support.
pub fn cascade_dispersive<T: Real>(phi: DispersivePhase<T>, cutoff: usize) -> Result<Unitary<T>> {
    check_cutoff(cutoff)?;
    let mut diag = vec![Complex::one(); 3 * cutoff];
    for n in 0..cutoff {
        diag[cutoff + n] = cis(phi.0 * T::lit(n as f64));
    }
    let support = (cutoff..3 * cutoff).collect();
    Unitary::new(vec![3, cutoff], CMatrix::from_diagonal(&diag), Some(support))
}

/// Semiclassical rotation of a two-level system driven by a classical field:
/// `[[cos χ, -i e^{iθ} sin χ], [-i e^{-iθ} sin χ, cos χ]]` on `(upper, lower)`.
pub fn ramsey<T: Real>(p: &RamseyParams<T>) -> Unitary<T> {
    let (c, s) = (p.chi.cos(), p.chi.sin());
    let m = CMatrix::from_rows(&[
        &[re(c), im(-s) * cis(p.theta)],
        &[im(-s) * cis(-p.theta), re(c)],
    ]);
    Unitary::new(vec![2], m, None).expect("2x2 matrix on one qubit")
}

/// `diag(e^{-iβ/2}, e^{iβ/2})`, the dispersive operator with the field
/// replaced by a classical amplitude.
pub fn semiclassical_phase<T: Real>(beta: T) -> Unitary<T> {
    let half = beta / T::lit(2.0);
    let m = CMatrix::from_diagonal(&[cis(-half), cis(half)]);
    Unitary::new(vec![2], m, None).expect("2x2 matrix on one qubit")
}

/// Parameters of `M = e^{iα} Rz(β) Ry(γ) Rz(δ)` with
/// `Rz(x) = diag(e^{-ix/2}, e^{ix/2})` and `Ry(γ)` the real rotation
/// `[[cos γ/2, -sin γ/2], [sin γ/2, cos γ/2]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Su2Params<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

/// Decomposes a 2×2 unitary. The result has `γ ∈ [0, π]` and
/// `α ∈ (-π/2, π/2]`; when one of the two rotation angles is undetermined
/// (`γ = 0` or `γ = π`) the whole phase goes to `β` and `δ = 0`.
pub fn su2_decompose<T: Real>(m: &CMatrix<T>, tol: T) -> Result<Su2Params<T>> {
    if m.rows() != 2 || m.cols() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: m.rows() });
    }
    let dev = m.unitarity_deviation(None);
    if dev > tol {
        return Err(Error::NotUnitary(dev.to_f64()));
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let alpha = det.arg() / T::lit(2.0);
    let unphase = cis(-alpha);
    let a = m[(0, 0)] * unphase;
    let b = m[(1, 0)] * unphase;
    let gamma = T::lit(2.0) * b.norm().atan2(a.norm());
    let tiny = T::epsilon() * T::lit(4.0);
    let (beta, delta) = if b.norm() <= tiny {
        (-T::lit(2.0) * a.arg(), T::zero())
    } else if a.norm() <= tiny {
        (T::lit(2.0) * b.arg(), T::zero())
    } else {
        (b.arg() - a.arg(), -a.arg() - b.arg())
    };
    Ok(Su2Params { alpha, beta, gamma, delta })
}

pub fn su2_compose<T: Real>(p: &Su2Params<T>) -> CMatrix<T> {
    let two = T::lit(2.0);
    let rz = |x: T| CMatrix::from_diagonal(&[cis(-x / two), cis(x / two)]);
    let (c, s) = ((p.gamma / two).cos(), (p.gamma / two).sin());
    let ry = CMatrix::from_rows(&[&[re(c), re(-s)], &[re(s), re(c)]]);
    (&(&rz(p.beta) * &ry) * &rz(p.delta)).scale(cis(p.alpha))
}

/// Large-detuning lambda-atom operator on `(lambda atom, mode)`:
///
/// ```text
/// -e^{iφa†a}|a⟩⟨a| + ½(e^{iφa†a}+1)(|b⟩⟨b| + |c⟩⟨c|)
///   + ½e^{i(φ1-φ2)}(e^{iφa†a}-1)|b⟩⟨c| + ½e^{-i(φ1-φ2)}(e^{iφa†a}-1)|c⟩⟨b|
/// ```
///
/// The `|a⟩` row uses `-e^{iφa†a}`; `|a⟩` is decoupled in this limit, so the
/// choice is a phase on a level the protocols never populate.
pub fn lambda_dispersive<T: Real>(phi: DispersivePhase<T>, phi1: T, phi2: T, cutoff: usize) -> Result<Unitary<T>> {
    check_cutoff(cutoff)?;
    let idx = |atom: usize, n: usize| atom * cutoff + n;
    let half = T::lit(0.5);
    let rel = cis(phi1 - phi2);
    let mut m = CMatrix::zeros(3 * cutoff, 3 * cutoff);
    for n in 0..cutoff {
        let e = cis(phi.0 * T::lit(n as f64));
        m[(idx(0, n), idx(0, n))] = -e;
        m[(idx(1, n), idx(1, n))] = (e + Complex::one()) * half;
        m[(idx(2, n), idx(2, n))] = (e + Complex::one()) * half;
        m[(idx(1, n), idx(2, n))] = rel * (e - Complex::one()) * half;
        m[(idx(2, n), idx(1, n))] = rel.conj() * (e - Complex::one()) * half;
    }
    Unitary::new(vec![3, cutoff], m, None)
}

/// Diagonal parity operators `Π± = ½(e^{iπa†a} ± 1)` on a mode.
///
/// `Π+` projects onto even photon numbers and `Π- = -P_odd`.
pub fn lambda_parity_projectors<T: Real>(cutoff: usize) -> Result<(CMatrix<T>, CMatrix<T>)> {
    check_cutoff(cutoff)?;
    let half = T::lit(0.5);
    let parity: Vec<Complex<T>> = (0..cutoff).map(|n| cis(T::PI() * T::lit(n as f64))).collect();
    let plus: Vec<_> = parity.iter().map(|&p| (p + Complex::one()) * half).collect();
    let minus: Vec<_> = parity.iter().map(|&p| (p - Complex::one()) * half).collect();
    Ok((CMatrix::from_diagonal(&plus), CMatrix::from_diagonal(&minus)))
}

/// The `φ = π` lambda operator assembled from the parity projectors:
/// `-e^{iπa†a}|a⟩⟨a| + Π+|b⟩⟨b| + Π-|b⟩⟨c| + Π-|c⟩⟨b| + Π+|c⟩⟨c|`.
pub fn lambda_parity_unitary<T: Real>(cutoff: usize) -> Result<Unitary<T>> {
    let (plus, minus) = lambda_parity_projectors::<T>(cutoff)?;
    let unit = |r: usize, c: usize| CMatrix::from_fn(3, 3, |i, j| if (i, j) == (r, c) { Complex::one() } else { Complex::zero() });
    let parity = &plus + &minus;
    let terms = [
        unit(0, 0).kron(&parity.scale(re(-T::one()))),
        unit(1, 1).kron(&plus),
        unit(1, 2).kron(&minus),
        unit(2, 1).kron(&minus),
        unit(2, 2).kron(&plus),
    ];
    let m = terms.iter().skip(1).fold(terms[0].clone(), |acc, t| &acc + t);
    Unitary::new(vec![3, cutoff], m, None)
}

/// Exact lambda-atom evolution with both transitions driven by one shared mode
/// (`α1 = g1 a`, `α2 = g2 a`), on `(lambda atom, mode)`.
pub fn lambda_exact_degenerate<T: Real>(p: &LambdaParams<T>, cutoff: usize) -> Result<Unitary<T>> {
    p.validate()?;
    check_cutoff(cutoff)?;
    let idx = |atom: usize, n: usize| atom * cutoff + n;
    let mut m = CMatrix::identity(3 * cutoff);
    // |b,0⟩ and |c,0⟩ cannot absorb a photon and stay put.
    for n in 0..cutoff - 1 {
        let amp = T::lit((n + 1) as f64).sqrt();
        let s = lambda_sector(p.g1 * amp, p.g2 * amp, p.delta, p.t);
        let members = [idx(0, n), idx(1, n + 1), idx(2, n + 1)];
        for (r, &i) in members.iter().enumerate() {
            for (c, &j) in members.iter().enumerate() {
                m[(i, j)] = s[r][c];
            }
        }
    }
    let top = idx(0, cutoff - 1);
    let support = (0..3 * cutoff).filter(|&i| i != top).collect();
    Unitary::new(vec![3, cutoff], m, Some(support))
}

/// Exact lambda-atom evolution with `a ↔ b` driven by mode 1 and `a ↔ c` by
/// mode 2, on `(lambda atom, mode 1, mode 2)`.
///
/// Sector `(n1, n2)` couples `|a,n1,n2⟩`, `|b,n1+1,n2⟩` and `|c,n1,n2+1⟩`.
/// Sectors with a member beyond either cutoff are frozen and dropped from
/// the support.
pub fn lambda_exact_nondegenerate<T: Real>(p: &LambdaParams<T>, cutoffs: (usize, usize)) -> Result<Unitary<T>> {
    p.validate()?;
    let (c1, c2) = cutoffs;
    check_cutoff(c1)?;
    check_cutoff(c2)?;
    let idx = |atom: usize, n1: usize, n2: usize| (atom * c1 + n1) * c2 + n2;
    let dim = 3 * c1 * c2;
    let mut m = CMatrix::identity(dim);
    let mut in_support = vec![true; dim];
    for n1 in 0..c1 {
        for n2 in 0..c2 {
            if n1 + 1 >= c1 || n2 + 1 >= c2 {
                in_support[idx(0, n1, n2)] = false;
                if n1 + 1 < c1 {
                    in_support[idx(1, n1 + 1, n2)] = false;
                }
                if n2 + 1 < c2 {
                    in_support[idx(2, n1, n2 + 1)] = false;
                }
                continue;
            }
            let xb = p.g1 * T::lit((n1 + 1) as f64).sqrt();
            let xc = p.g2 * T::lit((n2 + 1) as f64).sqrt();
            let s = lambda_sector(xb, xc, p.delta, p.t);
            let members = [idx(0, n1, n2), idx(1, n1 + 1, n2), idx(2, n1, n2 + 1)];
            for (r, &i) in members.iter().enumerate() {
                for (c, &j) in members.iter().enumerate() {
                    m[(i, j)] = s[r][c];
                }
            }
        }
    }
    let support = (0..dim).filter(|&i| in_support[i]).collect();
    Unitary::new(vec![3, c1, c2], m, Some(support))
}

/// Two-mode classical-field limit on the lower pair `(b, c)`:
/// `u_bb = u_cc = ½(e^{iφ}+1)`, `u_bc = ½e^{iϕ}(e^{iφ}-1)`,
/// `u_cb = ½e^{-iϕ}(e^{iφ}-1)`, with `ϕ = θ1 - θ2` the relative field phase.
pub fn lambda_classical_rotation<T: Real>(phi: T, rel_phase: T) -> Unitary<T> {
    let half = T::lit(0.5);
    let e = cis(phi);
    let diag = (e + Complex::one()) * half;
    let off = (e - Complex::one()) * half;
    let m = CMatrix::from_rows(&[&[diag, cis(rel_phase) * off], &[cis(-rel_phase) * off, diag]]);
    Unitary::new(vec![2], m, None).expect("2x2 matrix on one qubit")
}

/// Spectral-norm distance between the exact and dispersive two-level
/// operators, restricted to photon numbers `n ≤ max_n`.
pub fn jc_dispersive_error<T: Real>(g: T, delta: T, t: T, max_n: usize) -> Result<T> {
    let cutoff = max_n + 2;
    let exact = jc_unitary(&JcParams { g, delta, t }, cutoff)?;
    let approx = jc_dispersive(DispersivePhase::two_level(g, t, delta), cutoff)?;
    let idx: Vec<usize> = (0..2).flat_map(|a| (0..=max_n).map(move |n| a * cutoff + n)).collect();
    Ok((exact.matrix() - approx.matrix()).submatrix(&idx).op_norm())
}

/// Spectral-norm distance between the exact degenerate lambda operator with
/// `g1 = g2 = g` and its dispersive limit, on the lower manifold `{b, c}` with
/// `n ≤ max_n`. The `|a⟩` row is excluded: the two expressions assign it
/// different phases and it is never populated.
pub fn lambda_dispersive_error<T: Real>(g: T, delta: T, t: T, max_n: usize) -> Result<T> {
    let cutoff = max_n + 2;
    let p = LambdaParams { g1: re(g), g2: re(g), delta, t };
    let exact = lambda_exact_degenerate(&p, cutoff)?;
    let approx = lambda_dispersive(DispersivePhase::lambda(g, t, delta), T::zero(), T::zero(), cutoff)?;
    let idx: Vec<usize> = (1..3).flat_map(|a| (0..=max_n).map(move |n| a * cutoff + n)).collect();
    Ok((exact.matrix() - approx.matrix()).submatrix(&idx).op_norm())
}
