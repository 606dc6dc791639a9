//! Exact arithmetic in the two-step tower `ℚ_p ⊂ L = ℚ_p(η) ⊂ M`, where
//! `η` is a primitive p-th root of unity, `Π = η − 1` uniformizes `L`, and
//! `M/L` is unramified of degree `p^m`.
//!
//! An element of the valuation ring `O_M` is stored as a grid of
//! coefficients `c[i][j]` of `Π^i·u^j` (`i < p−1` ranging over Π-powers,
//! `j < p^m` over powers of the unramified generator `u`), each coefficient
//! an integer mod `p^n_work`. A separate `pi_shift` exponent lets the crate
//! carry the handful of genuinely fractional intermediates (`Π⁻¹·η·λ(x)` and
//! friends) without ever rounding.
//!
//! `n_work = 2·N + 2` working digits back a declared precision of `N`
//! digits; every lossy operation (the exact divisions by `p` and by `Π`)
//! decrements the per-element `known` counter so that claimed digits are
//! always genuinely guaranteed.
//!
//! Reduction rules: `u` satisfies a monic degree-`p^m` lift `g` of the
//! residue-field modulus, and `Π` satisfies the Eisenstein polynomial
//! `f(T) = ((1+T)^p − 1)/T = Σ_k C(p,k+1)·T^k`, so `Π^(p−1) = p·w` with
//! `w ≡ −1` a unit. The Frobenius `σ` fixes `L` and acts on `u` through a
//! Newton-lifted root of `g` congruent to `u^p` mod `p`.

mod text;

pub use text::{decode_json, element_to_text, encode_json, parse_element};

use crate::arith::{add_mod, binomial, checked_prime_power, mul_mod, neg_mod, sub_mod, val_p_u64};
use crate::error::{Error, Result};
use crate::padic::PAdicScalar;
use crate::residue::{
    self, pmod, pmul, ppow_mod, selfdual_normal_basis, ResidueElement, ResidueField,
};
use std::fmt;
use std::sync::Arc;

/// Π-adic valuation report: exact when witnessed by a coefficient with a
/// fully known digit, otherwise a lower bound limited by the guaranteed
/// digits of the element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PiValuation {
    Exact(i64),
    AtLeast(i64),
}

impl PiValuation {
    /// The guaranteed lower bound in either case.
    pub fn lower_bound(&self) -> i64 {
        match *self {
            PiValuation::Exact(v) | PiValuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, PiValuation::Exact(_))
    }
}

impl fmt::Display for PiValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PiValuation::Exact(v) => write!(f, "{v}"),
            PiValuation::AtLeast(v) => write!(f, "≥{v}"),
        }
    }
}

#[derive(Debug)]
struct TowerInner {
    p: u64,
    m: u32,
    /// Declared precision `N` (digits the lab promises to the caller).
    declared: u32,
    /// Working precision `n_work = 2N + 2`.
    n_work: u32,
    /// `p^n_work`.
    modulus: u64,
    /// Residue degree `d = p^m`.
    d: usize,
    field: ResidueField,
    /// Residue element of trace one (the normal-basis generator τ for m=1).
    chi_residue: ResidueElement,
    /// Monic lift of the residue modulus, ascending, length `d+1`, mod `p^n_work`.
    g: Vec<u64>,
    /// Eisenstein polynomial of Π: `f_k = C(p, k+1)`, ascending, length `p`.
    f: Vec<u64>,
    /// Substitution matrices for σ^k: `sigma_mats[k][j'][j]` = coefficient of
    /// `u^j'` in `(σ^k u)^j` mod `g`.
    sigma_mats: Vec<Vec<Vec<u64>>>,
    /// Σ_k σ^k as a matrix (trace to L on each Π-row).
    trace_mat: Vec<Vec<u64>>,
    /// Coefficients of the unit `w = Π^(p−1)/p` (scalar in u), length `p−1`.
    w_coeffs: Vec<u64>,
    /// Grid of `w⁻¹` (scalar in u), length `p−1`.
    w_inv_coeffs: Vec<u64>,
    /// Power sums `s_i = Tr_{L/ℚ_p}(Π^i)` for `i < p−1`, mod `p^n_work`.
    power_sums: Vec<u64>,
}

/// The ambient tower. Cheap to clone; all heavy tables are computed once in
/// [`Tower::new`] and verified on the spot.
#[derive(Debug, Clone)]
pub struct Tower {
    inner: Arc<TowerInner>,
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        self.inner.p == other.inner.p
            && self.inner.m == other.inner.m
            && self.inner.n_work == other.inner.n_work
    }
}
impl Eq for Tower {}

// --- small helpers over (ℤ/p^K)[x]/(g) -------------------------------------

/// Inverse of `a` in `(ℤ/modulus)[x]/(g)` for `a` whose residue mod p is a
/// unit: residue-field inverse lifted by Newton iteration `x ← x(2 − ax)`.
fn r0_inv(a: &[u64], g: &[u64], modulus: u64, p: u64, field: &ResidueField) -> Result<Vec<u64>> {
    let abar: Vec<u64> = a.iter().map(|&c| c % p).collect();
    let abar_elt = field.element(&abar)?;
    if abar_elt.is_zero() {
        return Err(Error::NotAUnit);
    }
    let inv0 = abar_elt.inv()?;
    let mut x: Vec<u64> = inv0.coeffs().to_vec();
    for _ in 0..8 {
        // x(2 − a x)
        let ax = pmod(&pmul(a, &x, modulus), g, modulus);
        let mut two_minus = vec![0u64; ax.len().max(1)];
        two_minus[0] = 2 % modulus;
        for (k, &c) in ax.iter().enumerate() {
            two_minus[k] = sub_mod(two_minus[k], c, modulus);
        }
        x = pmod(&pmul(&x, &two_minus, modulus), g, modulus);
        let check = pmod(&pmul(a, &x, modulus), g, modulus);
        if check == vec![1u64] {
            return Ok(x);
        }
    }
    Err(Error::ConvergenceStall(
        "unit inversion in the unramified part did not converge".into(),
    ))
}

fn r0_eval(poly: &[u64], point: &[u64], g: &[u64], modulus: u64) -> Vec<u64> {
    let mut acc: Vec<u64> = Vec::new();
    for &c in poly.iter().rev() {
        let mut next = pmod(&pmul(&acc, point, modulus), g, modulus);
        if next.is_empty() {
            next = vec![0];
        }
        next[0] = add_mod(next[0], c % modulus, modulus);
        acc = residue::ptrim(next);
    }
    acc
}

fn pad_to(mut v: Vec<u64>, len: usize) -> Vec<u64> {
    v.resize(len, 0);
    v
}

impl Tower {
    /// Builds the tower for prime `p ∈ {3,5,7}`, unramified height `m ≥ 1`
    /// and declared precision `N`, verifying every structural identity
    /// (root lift, Frobenius order, the unit `w`, trace tables) before
    /// returning.
    pub fn new(p: u64, m: u32, declared_precision: u32) -> Result<Self> {
        if !matches!(p, 3 | 5 | 7) {
            return Err(Error::UnsupportedPrime(p));
        }
        if m == 0 {
            return Err(Error::InvalidArgument(
                "tower height m must be at least 1".into(),
            ));
        }
        if declared_precision == 0 {
            return Err(Error::InvalidArgument(
                "declared precision must be at least 1".into(),
            ));
        }
        let n_work = 2 * declared_precision + 2;
        let modulus = checked_prime_power(p, n_work).ok_or(Error::PrecisionTooHigh {
            prime: p,
            precision: declared_precision,
        })?;
        let d_u128 = (p as u128).pow(m);
        if d_u128 > 64 {
            return Err(Error::InvalidArgument(format!(
                "residue degree p^m = {d_u128} exceeds the supported bound of 64"
            )));
        }
        let d = d_u128 as usize;

        // Residue field with a distinguished trace-one element.
        let (field, chi_residue) = if m == 1 {
            selfdual_normal_basis(p)?
        } else {
            let modpoly = residue::find_irreducible(p, d);
            let field = ResidueField::new(p, modpoly)?;
            let chi = field.trace_one_element();
            (field, chi)
        };

        // Monic integral lift of the residue modulus.
        let g: Vec<u64> = field.modulus().iter().map(|&c| c % modulus).collect();

        // Eisenstein polynomial of Π: f_k = C(p, k+1).
        let f: Vec<u64> = (0..p).map(|k| binomial(p, k + 1) % modulus).collect();

        // σ(u): the root of g congruent to u^p (Newton from the seed u^p).
        let gprime: Vec<u64> = g
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| mul_mod(k as u64 % modulus, c, modulus))
            .collect();
        let x_poly = vec![0u64, 1];
        let mut sigma_u = ppow_mod(&x_poly, p, &g, modulus);
        for _ in 0..10 {
            let gval = r0_eval(&g, &sigma_u, &g, modulus);
            if gval.is_empty() {
                break;
            }
            let gpval = r0_eval(&gprime, &sigma_u, &g, modulus);
            let gpinv = r0_inv(&gpval, &g, modulus, p, &field)?;
            let delta = pmod(&pmul(&gval, &gpinv, modulus), &g, modulus);
            // sigma_u −= delta
            let mut next = pad_to(sigma_u.clone(), d.max(delta.len()));
            for (k, &c) in delta.iter().enumerate() {
                next[k] = sub_mod(next[k], c, modulus);
            }
            sigma_u = residue::ptrim(next);
        }
        if !r0_eval(&g, &sigma_u, &g, modulus).is_empty() {
            return Err(Error::ConstructionFailed(
                "Newton lift of the Frobenius root did not converge".into(),
            ));
        }
        // σu ≡ u^p (mod p).
        let up_mod_p = ppow_mod(&x_poly, p, &g, modulus);
        let sigma_u_padded = pad_to(sigma_u.clone(), d);
        for (a, b) in sigma_u_padded.iter().zip(pad_to(up_mod_p, d).iter()) {
            if a % p != b % p {
                return Err(Error::ConstructionFailed(
                    "Frobenius root is not congruent to u^p mod p".into(),
                ));
            }
        }

        // σ^k(u) for all k, plus the substitution matrices.
        let mut sigma_u_iterates: Vec<Vec<u64>> = Vec::with_capacity(d);
        sigma_u_iterates.push(vec![0, 1]); // σ^0(u) = u
        for k in 1..d {
            let prev = &sigma_u_iterates[k - 1];
            sigma_u_iterates.push(r0_eval(prev, &sigma_u, &g, modulus));
        }
        // σ^d(u) must return to u, and σ itself must move u (d > 1).
        let back = r0_eval(sigma_u_iterates.last().unwrap(), &sigma_u, &g, modulus);
        if residue::ptrim(back) != vec![0, 1] {
            return Err(Error::ConstructionFailed(
                "Frobenius does not have exact order p^m".into(),
            ));
        }
        if residue::ptrim(sigma_u.clone()) == vec![0, 1] {
            return Err(Error::ConstructionFailed(
                "Frobenius fixes u; the lift is degenerate".into(),
            ));
        }

        let mut sigma_mats = Vec::with_capacity(d);
        for su in &sigma_u_iterates {
            let mut mat = vec![vec![0u64; d]; d];
            let mut pow: Vec<u64> = vec![1]; // (σ^k u)^0
            for j in 0..d {
                for (jp, &c) in pow.iter().enumerate() {
                    mat[jp][j] = c;
                }
                if j + 1 < d {
                    pow = pmod(&pmul(&pow, su, modulus), &g, modulus);
                }
            }
            sigma_mats.push(mat);
        }
        let mut trace_mat = vec![vec![0u64; d]; d];
        for mat in &sigma_mats {
            for (r, row) in mat.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    trace_mat[r][c] = add_mod(trace_mat[r][c], v, modulus);
                }
            }
        }

        // w = Π^(p−1)/p = −Σ_{k<p−1} (C(p,k+1)/p)·Π^k; the binomials
        // C(p,k+1) for k+1 ∈ [1, p−1] are all divisible by p.
        let w_coeffs: Vec<u64> = (0..p - 1)
            .map(|k| neg_mod((binomial(p, k + 1) / p) % modulus, modulus))
            .collect();

        // Power sums s_i = Tr_{L/ℚp}(Π^i) via the companion matrix of f.
        let deg = (p - 1) as usize;
        let mut companion = vec![vec![0u64; deg]; deg];
        for r in 1..deg {
            companion[r][r - 1] = 1;
        }
        for r in 0..deg {
            companion[r][deg - 1] = neg_mod(f[r] % modulus, modulus);
        }
        let mut power_sums = Vec::with_capacity(deg);
        let mut mat_pow = vec![vec![0u64; deg]; deg];
        for (r, row) in mat_pow.iter_mut().enumerate() {
            row[r] = 1;
        }
        for _ in 0..deg {
            let tr = (0..deg).fold(0u64, |acc, r| add_mod(acc, mat_pow[r][r], modulus));
            power_sums.push(tr);
            // mat_pow ← mat_pow · companion
            let mut next = vec![vec![0u64; deg]; deg];
            for r in 0..deg {
                for k in 0..deg {
                    let a = mat_pow[r][k];
                    if a == 0 {
                        continue;
                    }
                    for c in 0..deg {
                        next[r][c] =
                            add_mod(next[r][c], mul_mod(a, companion[k][c], modulus), modulus);
                    }
                }
            }
            mat_pow = next;
        }

        // w⁻¹ by Newton iteration in (ℤ/p^K)[T]/(f): w ≡ −1 mod Π, so the
        // seed −1 is a residue inverse and x ← x + x(1 − wx) converges.
        let w_inv_coeffs = {
            let w_poly = residue::ptrim(w_coeffs.clone());
            let mut x = vec![modulus - 1];
            let mut converged = false;
            for _ in 0..64 {
                let wx = pmod(&pmul(&w_poly, &x, modulus), &f, modulus);
                let mut e = vec![0u64; wx.len().max(1)];
                e[0] = 1;
                for (k, &c) in wx.iter().enumerate() {
                    e[k] = sub_mod(e[k], c, modulus);
                }
                let e = residue::ptrim(e);
                if e.is_empty() {
                    converged = true;
                    break;
                }
                let xe = pmod(&pmul(&x, &e, modulus), &f, modulus);
                let mut next = pad_to(x.clone(), xe.len().max(x.len()));
                for (k, &c) in xe.iter().enumerate() {
                    next[k] = add_mod(next[k], c, modulus);
                }
                x = residue::ptrim(next);
            }
            if !converged {
                return Err(Error::ConstructionFailed(
                    "inversion of the unit w stalled".into(),
                ));
            }
            pad_to(x, (p - 1) as usize)
        };

        let inner = TowerInner {
            p,
            m,
            declared: declared_precision,
            n_work,
            modulus,
            d,
            field,
            chi_residue,
            g,
            f,
            sigma_mats,
            trace_mat,
            w_coeffs,
            w_inv_coeffs,
            power_sums,
        };
        let tower = Tower {
            inner: Arc::new(inner),
        };
        let w_elt = tower.w_unit();

        // Structural verification: Π^(p−1) = p·w and η^p = 1 exactly.
        let pi = tower.pi();
        let mut pi_pow = tower.one();
        for _ in 0..p - 1 {
            pi_pow = pi_pow.mul(&pi)?;
        }
        let pw = w_elt.scale_u64(p);
        if !pi_pow.same_value(&pw)? {
            return Err(Error::ConstructionFailed(
                "Π^(p−1) ≠ p·w in the constructed tower".into(),
            ));
        }
        let eta = tower.eta();
        let mut eta_pow = tower.one();
        for _ in 0..p {
            eta_pow = eta_pow.mul(&eta)?;
        }
        if !eta_pow.same_value(&tower.one())? {
            return Err(Error::ConstructionFailed(
                "(1+Π)^p ≠ 1 in the constructed tower".into(),
            ));
        }

        Ok(tower)
    }

    pub fn prime(&self) -> u64 {
        self.inner.p
    }

    /// Unramified height `m` (so `[M:L] = p^m`).
    pub fn height(&self) -> u32 {
        self.inner.m
    }

    pub fn declared_precision(&self) -> u32 {
        self.inner.declared
    }

    pub fn working_precision(&self) -> u32 {
        self.inner.n_work
    }

    /// `p^n_work`, the coefficient modulus.
    pub fn coeff_modulus(&self) -> u64 {
        self.inner.modulus
    }

    /// Residue degree `d = p^m` of `M` over `ℚ_p`.
    pub fn residue_degree(&self) -> usize {
        self.inner.d
    }

    pub fn residue_field(&self) -> &ResidueField {
        &self.inner.field
    }

    /// The distinguished residue element of absolute trace 1 (`τ` from the
    /// self-dual normal basis when `m = 1`).
    pub fn trace_one_residue(&self) -> &ResidueElement {
        &self.inner.chi_residue
    }

    /// Eisenstein coefficients of `f(T) = ((1+T)^p − 1)/T` (ascending).
    pub fn eisenstein_coeffs(&self) -> &[u64] {
        &self.inner.f
    }

    fn blank(&self) -> Vec<Vec<u64>> {
        vec![vec![0u64; self.inner.d]; (self.inner.p - 1) as usize]
    }

    pub fn zero(&self) -> TowerElement {
        TowerElement {
            tower: self.clone(),
            pi_shift: 0,
            coeffs: self.blank(),
            known: self.inner.n_work,
        }
    }

    pub fn one(&self) -> TowerElement {
        self.from_u64(1)
    }

    pub fn from_u64(&self, v: u64) -> TowerElement {
        let mut e = self.zero();
        e.coeffs[0][0] = v % self.inner.modulus;
        e
    }

    pub fn from_i64(&self, v: i64) -> TowerElement {
        let m = self.inner.modulus;
        let r = v.rem_euclid(m as i64) as u64;
        self.from_u64(r)
    }

    /// The uniformizer Π of `L` (and of `M`).
    pub fn pi(&self) -> TowerElement {
        self.monomial(1, 0, 1).expect("Π is always representable")
    }

    /// `η = 1 + Π`, the distinguished p-th root of unity.
    pub fn eta(&self) -> TowerElement {
        let mut e = self.one();
        e.coeffs[1][0] = 1;
        e
    }

    /// The unramified generator `u`.
    pub fn u_gen(&self) -> TowerElement {
        self.monomial(0, 1, 1).expect("u is always representable")
    }

    /// `c · Π^i · u^j` for `i < p−1`, `j < p^m`.
    pub fn monomial(&self, i: usize, j: usize, c: u64) -> Result<TowerElement> {
        if i >= (self.inner.p - 1) as usize || j >= self.inner.d {
            return Err(Error::InvalidArgument(format!(
                "monomial Π^{i}·u^{j} outside the basis range"
            )));
        }
        let mut e = self.zero();
        e.coeffs[i][j] = c % self.inner.modulus;
        Ok(e)
    }

    /// Lifts a residue element (Teichmüller-free: plain coefficient lift).
    pub fn from_residue(&self, r: &ResidueElement) -> Result<TowerElement> {
        if r.field() != &self.inner.field {
            return Err(Error::ParamsMismatch);
        }
        let mut e = self.zero();
        for (j, &c) in r.coeffs().iter().enumerate() {
            e.coeffs[0][j] = c % self.inner.modulus;
        }
        Ok(e)
    }

    /// Builds an `L`-valued element from its `p−1` Π-coefficients.
    pub fn from_l_coeffs(&self, coeffs: &[u64]) -> Result<TowerElement> {
        if coeffs.len() > (self.inner.p - 1) as usize {
            return Err(Error::InvalidArgument(
                "too many Π-coefficients for L".into(),
            ));
        }
        let mut e = self.zero();
        for (i, &c) in coeffs.iter().enumerate() {
            e.coeffs[i][0] = c % self.inner.modulus;
        }
        Ok(e)
    }

    /// Builds an element from a full coefficient grid (rows = Π-powers,
    /// columns = u-powers), validating the shape and coefficient ranges.
    pub fn from_grid(&self, pi_shift: i64, grid: Vec<Vec<u64>>) -> Result<TowerElement> {
        let rows = (self.inner.p - 1) as usize;
        if grid.len() != rows {
            return Err(Error::InvalidArgument(format!(
                "expected {} Π-rows, found {}",
                rows,
                grid.len()
            )));
        }
        for row in &grid {
            if row.len() != self.inner.d {
                return Err(Error::InvalidArgument(format!(
                    "expected {} u-columns, found {}",
                    self.inner.d,
                    row.len()
                )));
            }
            for &c in row {
                if c >= self.inner.modulus {
                    return Err(Error::InvalidArgument(format!(
                        "coefficient {c} out of range for modulus {}",
                        self.inner.modulus
                    )));
                }
            }
        }
        Ok(TowerElement {
            tower: self.clone(),
            pi_shift,
            coeffs: grid,
            known: self.inner.n_work,
        })
    }

    /// `w⁻¹` as an element (unit with `Π^(p−1)·w⁻¹ = p`).
    pub fn w_inv(&self) -> TowerElement {
        self.from_l_coeffs(&self.inner.w_inv_coeffs.clone())
            .expect("stored coefficients are valid")
    }

    /// `w` as an element (`Π^(p−1) = p·w`, `w ≡ −1 mod Π`).
    pub fn w_unit(&self) -> TowerElement {
        self.from_l_coeffs(&self.inner.w_coeffs.clone())
            .expect("stored coefficients are valid")
    }

    /// Trace of `Π^i` from `L` down to `ℚ_p` (i < p−1), from the companion
    /// matrix of the Eisenstein polynomial.
    pub fn pi_power_sum(&self, i: usize) -> u64 {
        self.inner.power_sums[i]
    }
}

/// An element of `O_M` (or `Π^pi_shift·O_M` for crate-internal fractional
/// intermediates), held to `known` guaranteed p-adic digits per coefficient.
#[derive(Debug, Clone)]
pub struct TowerElement {
    tower: Tower,
    pi_shift: i64,
    /// `coeffs[i][j]` multiplies `Π^(i+pi_shift)·u^j`, value mod `p^n_work`.
    coeffs: Vec<Vec<u64>>,
    known: u32,
}

impl TowerElement {
    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn pi_shift(&self) -> i64 {
        self.pi_shift
    }

    /// Guaranteed p-adic digits per coefficient.
    pub fn known_digits(&self) -> u32 {
        self.known
    }

    pub fn grid(&self) -> &Vec<Vec<u64>> {
        &self.coeffs
    }

    pub(crate) fn set_known(&mut self, k: u32) {
        self.known = k.min(self.tower.inner.n_work);
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.tower != other.tower {
            return Err(Error::ParamsMismatch);
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|row| row.iter().all(|&c| c == 0))
    }

    /// Whether the element lies in `L` (no dependence on `u`).
    pub fn is_l_valued(&self) -> bool {
        self.coeffs
            .iter()
            .all(|row| row.iter().skip(1).all(|&c| c == 0))
    }

    /// Whether the element is a `ℚ_p`-scalar.
    pub fn is_scalar(&self) -> bool {
        self.is_l_valued() && self.coeffs.iter().skip(1).all(|row| row[0] == 0)
    }

    /// The `p−1` Π-coefficients of an `L`-valued element with no shift.
    pub fn l_coeffs(&self) -> Result<Vec<u64>> {
        let e = self.materialized()?;
        if !e.is_l_valued() {
            return Err(Error::NotInBaseField);
        }
        Ok(e.coeffs.iter().map(|row| row[0]).collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let (a, b) = align_shifts(self, other)?;
        let m = self.tower.inner.modulus;
        let mut out = a.clone();
        for (ra, rb) in out.coeffs.iter_mut().zip(b.coeffs.iter()) {
            for (ca, &cb) in ra.iter_mut().zip(rb.iter()) {
                *ca = add_mod(*ca, cb, m);
            }
        }
        out.known = a.known.min(b.known);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let m = self.tower.inner.modulus;
        let mut out = self.clone();
        for row in out.coeffs.iter_mut() {
            for c in row.iter_mut() {
                *c = neg_mod(*c, m);
            }
        }
        out
    }

    pub fn scale_u64(&self, s: u64) -> Self {
        let m = self.tower.inner.modulus;
        let s = s % m;
        let mut out = self.clone();
        for row in out.coeffs.iter_mut() {
            for c in row.iter_mut() {
                *c = mul_mod(*c, s, m);
            }
        }
        out
    }

    pub fn scale_i64(&self, s: i64) -> Self {
        let m = self.tower.inner.modulus;
        self.scale_u64(s.rem_euclid(m as i64) as u64)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let inner = &self.tower.inner;
        let (p, d, m) = (inner.p as usize, inner.d, inner.modulus);
        let rows = p - 1;
        // Bivariate convolution.
        let mut full = vec![vec![0u64; 2 * d - 1]; 2 * rows - 1];
        for (i, ra) in self.coeffs.iter().enumerate() {
            for (j, &ca) in ra.iter().enumerate() {
                if ca == 0 {
                    continue;
                }
                for (k, rb) in other.coeffs.iter().enumerate() {
                    for (l, &cb) in rb.iter().enumerate() {
                        if cb == 0 {
                            continue;
                        }
                        let t = &mut full[i + k][j + l];
                        *t = add_mod(*t, mul_mod(ca, cb, m), m);
                    }
                }
            }
        }
        // Reduce u-powers row-wise mod g.
        let mut reduced: Vec<Vec<u64>> = full
            .into_iter()
            .map(|row| pad_to(pmod(&row, &inner.g, m), d))
            .collect();
        // Reduce Π-powers via Π^(p−1) = −Σ_k f_k Π^k.
        for i in (rows..reduced.len()).rev() {
            let row = std::mem::take(&mut reduced[i]);
            if row.iter().all(|&c| c == 0) {
                continue;
            }
            for k in 0..rows {
                let fk = inner.f[k];
                if fk == 0 {
                    continue;
                }
                let target = i - rows + k;
                for (col, &c) in row.iter().enumerate() {
                    let t = &mut reduced[target][col];
                    *t = sub_mod(*t, mul_mod(fk, c, m), m);
                }
            }
        }
        reduced.truncate(rows);
        Ok(TowerElement {
            tower: self.tower.clone(),
            pi_shift: self.pi_shift + other.pi_shift,
            coeffs: reduced,
            known: self.known.min(other.known),
        })
    }

    pub fn pow_u64(&self, mut exp: u64) -> Result<Self> {
        let mut acc = self.tower.one();
        acc.known = self.known;
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Multiplies by `Π^k` (lossless, lazy).
    pub fn mul_pi_pow(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.pi_shift += k;
        out
    }

    /// Folds a non-negative `pi_shift` into the coefficient grid.
    pub fn materialized(&self) -> Result<Self> {
        if self.pi_shift == 0 {
            return Ok(self.clone());
        }
        if self.pi_shift < 0 {
            return Err(Error::InvalidArgument(
                "cannot materialize a negative Π-shift; divide first".into(),
            ));
        }
        let mut data = self.clone();
        data.pi_shift = 0;
        let pi_pow = self.tower.pi().pow_u64(self.pi_shift as u64)?;
        data.mul(&pi_pow)
    }

    /// Π-adic valuation with soundness relative to `known`.
    pub fn pi_val(&self) -> PiValuation {
        let inner = &self.tower.inner;
        let pm1 = (inner.p - 1) as i64;
        let known = self.known as i64;
        let mut exact: Option<i64> = None;
        let mut bound: Option<i64> = None;
        for (i, row) in self.coeffs.iter().enumerate() {
            for &c in row.iter() {
                let contribution = match val_p_u64(c, inner.p) {
                    Some(v) if (v as i64) < known => {
                        exact = Some(exact.map_or(i as i64 + pm1 * v as i64, |e: i64| {
                            e.min(i as i64 + pm1 * v as i64)
                        }));
                        continue;
                    }
                    _ => i as i64 + pm1 * known,
                };
                bound = Some(bound.map_or(contribution, |b: i64| b.min(contribution)));
            }
        }
        match (exact, bound) {
            (Some(e), Some(b)) if e <= b => PiValuation::Exact(e + self.pi_shift),
            (Some(_), Some(b)) => PiValuation::AtLeast(b + self.pi_shift),
            (Some(e), None) => PiValuation::Exact(e + self.pi_shift),
            (None, Some(b)) => PiValuation::AtLeast(b + self.pi_shift),
            (None, None) => PiValuation::AtLeast(self.pi_shift + pm1 * known),
        }
    }

    /// Exact division of every coefficient by `p^k` (shift untouched).
    pub fn div_exact_p(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.known {
            return Err(Error::PrecisionTooLow {
                required: k + 1,
                actual: self.known,
            });
        }
        let inner = &self.tower.inner;
        let pk = checked_prime_power(inner.p, k).expect("k < n_work so p^k fits");
        let mut out = self.clone();
        for row in out.coeffs.iter_mut() {
            for c in row.iter_mut() {
                if *c % pk != 0 {
                    let avail = val_p_u64(*c, inner.p).unwrap_or(0) as i64;
                    return Err(Error::NotDivisible {
                        required: k as i64,
                        available: avail,
                    });
                }
                *c /= pk;
            }
        }
        out.known = self.known - k;
        Ok(out)
    }

    /// Exact division by `Π^k`, materializing through the unit relation
    /// `Π^(p−1) = p·w`. Costs `ceil(residual/(p−1))` known digits when the
    /// shift cannot absorb the division.
    pub fn div_exact_pi(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return Ok(self.mul_pi_pow(-k));
        }
        if k == 0 {
            return Ok(self.clone());
        }
        if self.pi_shift >= k {
            return Ok(self.mul_pi_pow(-k));
        }
        let t = (k - self.pi_shift.max(0)) as u64;
        let mut data = self.clone();
        if self.pi_shift > 0 {
            data.pi_shift = 0;
        }
        if self.pi_shift < 0 {
            // Fold the deficit into the data division.
            data.pi_shift = 0;
            return data.div_exact_pi(k - self.pi_shift);
        }
        let inner = &self.tower.inner;
        let pm1 = inner.p - 1;
        let digit_cost = t.div_ceil(pm1) as u32;
        if digit_cost >= data.known {
            return Err(Error::PrecisionTooLow {
                required: digit_cost + 1,
                actual: data.known,
            });
        }
        if data.is_zero() {
            let mut out = data;
            out.known -= digit_cost;
            return Ok(out);
        }
        match data.pi_val() {
            PiValuation::Exact(v) if v < t as i64 => {
                return Err(Error::NotDivisible {
                    required: t as i64,
                    available: v,
                })
            }
            PiValuation::AtLeast(b) if b < t as i64 => {
                return Err(Error::PrecisionTooLow {
                    required: digit_cost + 1,
                    actual: data.known,
                })
            }
            _ => {}
        }
        let r = t % pm1;
        let q = t / pm1;
        let (mul_elt, p_div) = if r == 0 {
            (self.tower.w_inv().pow_u64(q)?, q as u32)
        } else {
            let extra = self.tower.pi().pow_u64(pm1 - r)?;
            (
                extra.mul(&self.tower.w_inv().pow_u64(q + 1)?)?,
                (q + 1) as u32,
            )
        };
        let shifted = data.mul(&mul_elt)?;
        let mut out = shifted.div_exact_p(p_div)?;
        // div_exact_p already deducted p_div digits = digit_cost.
        debug_assert_eq!(out.known, data.known - digit_cost);
        out.pi_shift = 0;
        Ok(out)
    }

    /// Applies σ^k (the Frobenius of `M/L`, lifted exactly; fixes `L`).
    pub fn sigma(&self, k: usize) -> Self {
        let inner = &self.tower.inner;
        let kk = k % inner.d;
        if kk == 0 {
            return self.clone();
        }
        let mat = &inner.sigma_mats[kk];
        let m = inner.modulus;
        let mut out = self.clone();
        for (row_idx, row) in self.coeffs.iter().enumerate() {
            let mut new_row = vec![0u64; inner.d];
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (jp, nr) in new_row.iter_mut().enumerate() {
                    *nr = add_mod(*nr, mul_mod(mat[jp][j], c, m), m);
                }
            }
            out.coeffs[row_idx] = new_row;
        }
        out
    }

    pub fn frobenius(&self) -> Self {
        self.sigma(1)
    }

    /// Trace from `M` to `L`: Σ_k σ^k. The result is certified `L`-valued;
    /// a nonzero `u`-component signals a broken Frobenius table.
    pub fn trace_to_l(&self) -> Result<Self> {
        let inner = &self.tower.inner;
        let m = inner.modulus;
        let mut out = self.clone();
        for (row_idx, row) in self.coeffs.iter().enumerate() {
            let mut new_row = vec![0u64; inner.d];
            for (j, &c) in row.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                for (jp, nr) in new_row.iter_mut().enumerate() {
                    *nr = add_mod(*nr, mul_mod(inner.trace_mat[jp][j], c, m), m);
                }
            }
            if new_row.iter().skip(1).any(|&c| c != 0) {
                return Err(Error::SigmaVarianceDetected);
            }
            out.coeffs[row_idx] = new_row;
        }
        Ok(out)
    }

    /// Trace from `L` to `ℚ_p` on an `L`-valued element, via the power sums
    /// `Tr(Π^i)`. Handles fractional shifts by rewriting
    /// `Π^e = Π^(e+K(p−1))·w^(−K)/p^K` and dividing the scalar result.
    pub fn trace_l_to_base(&self) -> Result<PAdicScalar> {
        if !self.is_l_valued() {
            return Err(Error::NotInBaseField);
        }
        let inner = &self.tower.inner;
        let m = inner.modulus;
        if self.pi_shift >= 0 {
            let data = self.materialized()?;
            let mut tr = 0u64;
            for (i, row) in data.coeffs.iter().enumerate() {
                tr = add_mod(tr, mul_mod(row[0], inner.power_sums[i], m), m);
            }
            let prec = data.known.min(inner.n_work);
            let scalar = PAdicScalar::new(inner.p, inner.n_work, tr)?;
            return scalar.reduce_precision(prec);
        }
        let e = self.pi_shift;
        let pm1 = (inner.p - 1) as i64;
        let k_big = (-e + pm1 - 1) / pm1; // ceil(−e/(p−1))
        let exponent = e + k_big * pm1; // in [0, p−1)
        debug_assert!((0..pm1).contains(&exponent));
        let mut data = self.clone();
        data.pi_shift = 0;
        let factor = self
            .tower
            .w_inv()
            .pow_u64(k_big as u64)?
            .mul(&self.tower.pi().pow_u64(exponent as u64)?)?;
        let folded = data.mul(&factor)?;
        let mut tr = 0u64;
        for (i, row) in folded.coeffs.iter().enumerate() {
            tr = add_mod(tr, mul_mod(row[0], inner.power_sums[i], m), m);
        }
        let scalar = PAdicScalar::new(inner.p, inner.n_work, tr)?;
        let scalar = scalar.reduce_precision(folded.known.min(inner.n_work))?;
        scalar.div_exact_p(k_big as u32)
    }

    /// Full trace `M → ℚ_p`.
    pub fn trace_to_base(&self) -> Result<PAdicScalar> {
        self.trace_to_l()?.trace_l_to_base()
    }

    /// Image in the residue field `𝔽_{p^m}` of `M` (shift must be
    /// materializable).
    pub fn residue(&self) -> Result<ResidueElement> {
        let data = self.materialized()?;
        let inner = &self.tower.inner;
        let coeffs: Vec<u64> = data.coeffs[0].iter().map(|&c| c % inner.p).collect();
        inner.field.element(&coeffs)
    }

    /// Newton inversion of a unit: residue inverse lifted quadratically.
    pub fn inv(&self) -> Result<Self> {
        if self.pi_shift != 0 {
            // Units have shift 0 in reduced form; materialize if positive.
            if self.pi_shift > 0 {
                return self.materialized()?.inv();
            }
            return Err(Error::NotAUnit);
        }
        let r = self.residue()?;
        if r.is_zero() {
            return Err(Error::NotAUnit);
        }
        let mut x = self.tower.from_residue(&r.inv()?)?;
        x.known = self.known;
        let one = self.tower.one();
        for _ in 0..40 {
            let e = one.sub(&self.mul(&x)?)?;
            if e.is_zero() {
                let mut out = x;
                out.known = self.known;
                return Ok(out);
            }
            x = x.add(&x.mul(&e)?)?;
        }
        Err(Error::ConvergenceStall(
            "tower unit inversion did not converge".into(),
        ))
    }

    /// Semantic equality to the jointly guaranteed digits: shifts are
    /// aligned and the grids compared mod `p^min(known)`. For exact
    /// elements this is full working-precision equality.
    pub fn same_value(&self, other: &Self) -> Result<bool> {
        self.check_same(other)?;
        let (a, b) = align_shifts(self, other)?;
        let k = a.known.min(b.known);
        if k == 0 {
            return Ok(true);
        }
        let pk = checked_prime_power(self.tower.inner.p, k).expect("k is at most n_work");
        Ok(a.coeffs
            .iter()
            .zip(&b.coeffs)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(&ca, &cb)| ca % pk == cb % pk)))
    }

    /// Reduces the element mod `Π^k`, zeroing every grid entry whose total
    /// Π-valuation provably reaches `k` (used for displaying truncations).
    pub fn truncate_pi(&self, k: i64) -> Result<Self> {
        let data = self.materialized()?;
        let inner = &self.tower.inner;
        let pm1 = (inner.p - 1) as i64;
        let mut out = data.clone();
        for (i, row) in out.coeffs.iter_mut().enumerate() {
            for c in row.iter_mut() {
                if *c == 0 {
                    continue;
                }
                // Π^i·c with val_p(c) = v contributes valuation i + (p−1)v;
                // peel off the part at or above Π^k.
                let keep_digits = ((k - i as i64) + pm1 - 1).div_euclid(pm1);
                if keep_digits <= 0 {
                    *c = 0;
                } else if (keep_digits as u32) < inner.n_work {
                    let pk = checked_prime_power(inner.p, keep_digits as u32)
                        .expect("below working precision");
                    *c %= pk;
                }
            }
        }
        Ok(out)
    }
}

fn align_shifts(a: &TowerElement, b: &TowerElement) -> Result<(TowerElement, TowerElement)> {
    if a.pi_shift == b.pi_shift {
        return Ok((a.clone(), b.clone()));
    }
    let s = a.pi_shift.min(b.pi_shift);
    let lower = |e: &TowerElement| -> Result<TowerElement> {
        let diff = e.pi_shift - s;
        if diff == 0 {
            return Ok(e.clone());
        }
        let pi_pow = e.tower.pi().pow_u64(diff as u64)?;
        let mut data = e.clone();
        data.pi_shift = s;
        // Multiply the grid by Π^diff without touching the shift.
        let mut folded = data.mul(&pi_pow)?;
        folded.pi_shift = s;
        Ok(folded)
    };
    Ok((lower(a)?, lower(b)?))
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match text::render_text(self) {
            Ok(s) => write!(f, "{s}"),
            Err(_) => {
                write!(
                    f,
                    "Π^{}·({})",
                    self.pi_shift,
                    text::render_grid(&self.coeffs)
                )
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn towers() -> Vec<Tower> {
        vec![
            Tower::new(3, 1, 6).unwrap(),
            Tower::new(5, 1, 5).unwrap(),
            Tower::new(7, 1, 4).unwrap(),
            Tower::new(3, 2, 5).unwrap(),
        ]
    }

    fn random_element(t: &Tower, rng: &mut impl Rng) -> TowerElement {
        let rows = (t.prime() - 1) as usize;
        let grid: Vec<Vec<u64>> = (0..rows)
            .map(|_| {
                (0..t.residue_degree())
                    .map(|_| rng.random_range(0..t.coeff_modulus()))
                    .collect()
            })
            .collect();
        t.from_grid(0, grid).unwrap()
    }

    #[test]
    fn construction_verifies_and_rejects_bad_parameters() {
        assert!(Tower::new(3, 1, 8).is_ok());
        assert!(matches!(
            Tower::new(2, 1, 4),
            Err(Error::UnsupportedPrime(2))
        ));
        assert!(matches!(
            Tower::new(11, 1, 4),
            Err(Error::UnsupportedPrime(11))
        ));
        assert!(matches!(
            Tower::new(3, 0, 4),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            Tower::new(7, 1, 11),
            Err(Error::PrecisionTooHigh {
                prime: 7,
                precision: 11
            })
        ));
        // Budget edges: the largest supported precisions fit exactly.
        assert!(Tower::new(3, 1, 18).is_ok());
        assert!(Tower::new(5, 1, 12).is_ok());
        assert!(Tower::new(7, 1, 10).is_ok());
        assert!(Tower::new(3, 1, 19).is_err());
        assert!(Tower::new(5, 1, 13).is_err());
    }

    #[test]
    fn eta_is_a_primitive_p_th_root_of_unity() {
        for t in towers() {
            let eta = t.eta();
            let mut pow = t.one();
            for k in 1..=t.prime() {
                pow = pow.mul(&eta).unwrap();
                if k < t.prime() {
                    assert!(!pow.same_value(&t.one()).unwrap(), "η^{k} = 1 prematurely");
                }
            }
            assert!(pow.same_value(&t.one()).unwrap(), "η^p ≠ 1");
        }
    }

    #[test]
    fn pi_to_the_p_minus_one_is_p_times_w_and_w_bar_is_minus_one() {
        for t in towers() {
            let p = t.prime();
            let lhs = t.pi().pow_u64(p - 1).unwrap();
            let rhs = t.w_unit().scale_u64(p);
            assert!(lhs.same_value(&rhs).unwrap());
            let wbar = t.w_unit().residue().unwrap();
            assert_eq!(wbar, t.residue_field().constant(p - 1), "w ≡ −1 mod Π");
            let prod = t.w_unit().mul(&t.w_inv()).unwrap();
            assert!(prod.same_value(&t.one()).unwrap());
        }
    }

    #[test]
    fn sigma_is_a_ring_homomorphism_of_exact_order_d() {
        for t in towers() {
            let mut rng = ChaCha12Rng::seed_from_u64(42);
            let d = t.residue_degree();
            for _ in 0..10 {
                let a = random_element(&t, &mut rng);
                let b = random_element(&t, &mut rng);
                let lhs = a.mul(&b).unwrap().sigma(1);
                let rhs = a.sigma(1).mul(&b.sigma(1)).unwrap();
                assert!(lhs.same_value(&rhs).unwrap(), "σ(ab) ≠ σ(a)σ(b)");
                let sum_lhs = a.add(&b).unwrap().sigma(1);
                let sum_rhs = a.sigma(1).add(&b.sigma(1)).unwrap();
                assert!(sum_lhs.same_value(&sum_rhs).unwrap());
                // Exact order d on elements.
                let mut it = a.clone();
                for _ in 0..d {
                    it = it.sigma(1);
                }
                assert!(it.same_value(&a).unwrap(), "σ^d ≠ id");
            }
            // σ fixes L pointwise.
            let l_elt = t.from_l_coeffs(&[5, 7]).unwrap();
            assert!(l_elt.sigma(1).same_value(&l_elt).unwrap());
            // σ moves u (d > 1 in every configured tower).
            assert!(!t.u_gen().sigma(1).same_value(&t.u_gen()).unwrap());
            // σ(u) ≡ u^p mod p.
            let su = t.u_gen().sigma(1);
            let up = t.u_gen().pow_u64(t.prime()).unwrap();
            let diff = su.sub(&up).unwrap();
            for row in diff.grid() {
                for &c in row {
                    assert_eq!(c % t.prime(), 0, "σ(u) ≢ u^p mod p");
                }
            }
        }
    }

    #[test]
    fn trace_to_l_matches_explicit_sigma_sum_and_lands_in_l() {
        for t in towers() {
            let mut rng = ChaCha12Rng::seed_from_u64(7);
            for _ in 0..10 {
                let a = random_element(&t, &mut rng);
                let via_matrix = a.trace_to_l().unwrap();
                let mut via_loop = t.zero();
                for k in 0..t.residue_degree() {
                    via_loop = via_loop.add(&a.sigma(k)).unwrap();
                }
                assert!(via_matrix.same_value(&via_loop).unwrap());
                assert!(via_matrix.is_l_valued());
            }
            // Tr(1) = d.
            let tr_one = t.one().trace_to_l().unwrap();
            assert!(tr_one
                .same_value(&t.from_u64(t.residue_degree() as u64))
                .unwrap());
        }
    }

    #[test]
    fn power_sums_match_newton_identities_and_eta_trace() {
        for t in towers() {
            let p = t.prime();
            let m = t.coeff_modulus();
            let deg = (p - 1) as usize;
            // Newton's identities: s_k + Σ_{i<k} a_i s_{k−i} + k·a_k = 0,
            // where f(T) = T^deg + a_1 T^(deg−1) + … + a_deg.
            let a = |i: usize| -> u64 { t.eisenstein_coeffs()[deg - i] % m };
            let mut s = vec![0u64; deg];
            s[0] = (deg as u64) % m;
            for k in 1..deg {
                let mut acc = mul_mod(k as u64 % m, a(k), m);
                for i in 1..k {
                    acc = add_mod(acc, mul_mod(a(i), s[k - i], m), m);
                }
                s[k] = neg_mod(acc, m);
            }
            for (i, &expected) in s.iter().enumerate() {
                assert_eq!(t.pi_power_sum(i), expected, "power sum s_{i} for p={p}");
            }
            // Tr_{L/ℚp}(η) = Tr(1) + Tr(Π) = (p−1) − p = −1.
            let tr_eta = t.eta().trace_l_to_base().unwrap();
            let minus_one = PAdicScalar::from_i64(p, t.working_precision(), -1).unwrap();
            assert_eq!(tr_eta.value(), minus_one.value());
        }
    }

    #[test]
    fn full_trace_is_transitive_and_q_linear() {
        let t = Tower::new(3, 2, 5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        for _ in 0..10 {
            let a = random_element(&t, &mut rng);
            let s = rng.random_range(0..t.coeff_modulus());
            let lhs = a.scale_u64(s).trace_to_base().unwrap();
            let rhs = a.trace_to_base().unwrap();
            assert_eq!(
                lhs.value(),
                mul_mod(rhs.value(), s % t.coeff_modulus(), t.coeff_modulus())
            );
        }
    }

    #[test]
    fn unit_inversion_and_non_units() {
        for t in towers() {
            let mut rng = ChaCha12Rng::seed_from_u64(23);
            let mut seen_units = 0;
            while seen_units < 8 {
                let a = random_element(&t, &mut rng);
                match a.inv() {
                    Ok(inv) => {
                        seen_units += 1;
                        assert!(a.mul(&inv).unwrap().same_value(&t.one()).unwrap());
                    }
                    Err(Error::NotAUnit) => assert!(a.residue().unwrap().is_zero()),
                    Err(e) => panic!("unexpected {e}"),
                }
            }
            assert!(matches!(t.pi().inv(), Err(Error::NotAUnit)));
            assert!(matches!(t.zero().inv(), Err(Error::NotAUnit)));
        }
    }

    #[test]
    fn pi_valuation_tracks_mixed_terms() {
        let t = Tower::new(3, 1, 6).unwrap();
        assert_eq!(t.pi().pi_val(), PiValuation::Exact(1));
        assert_eq!(
            t.from_u64(3).pi_val(),
            PiValuation::Exact(2),
            "v(p) = p−1 = 2"
        );
        assert_eq!(t.from_u64(9).pi_val(), PiValuation::Exact(4));
        let mixed = t.pi().add(&t.from_u64(9)).unwrap();
        assert_eq!(mixed.pi_val(), PiValuation::Exact(1));
        assert_eq!(t.one().pi_val(), PiValuation::Exact(0));
        match t.zero().pi_val() {
            PiValuation::AtLeast(b) => assert_eq!(b, 2 * t.working_precision() as i64),
            other => panic!("zero must report a lower bound, got {other}"),
        }
        // Π^5 = Π·(3w)² has valuation 5 through the unit relation.
        let pi5 = t.pi().pow_u64(5).unwrap();
        assert_eq!(pi5.pi_val(), PiValuation::Exact(5));
    }

    #[test]
    fn exact_pi_division_roundtrips_and_reports_failures() {
        for t in towers() {
            let mut rng = ChaCha12Rng::seed_from_u64(31);
            for k in 1..=(2 * (t.prime() - 1) + 1) as i64 {
                let x = random_element(&t, &mut rng);
                let shifted = x.mul(&t.pi().pow_u64(k as u64).unwrap()).unwrap();
                let back = shifted.div_exact_pi(k).unwrap();
                assert!(back.same_value(&x).unwrap(), "(Π^{k}·x)/Π^{k} ≠ x");
                let pm1 = t.prime() - 1;
                let expected_cost = (k as u64).div_ceil(pm1) as u32;
                assert_eq!(back.known_digits(), x.known_digits() - expected_cost);
            }
            // Π / Π² is not divisible.
            match t.pi().div_exact_pi(2) {
                Err(Error::NotDivisible {
                    required: 2,
                    available: 1,
                }) => {}
                other => panic!("expected NotDivisible, got {other:?}"),
            }
        }
    }

    #[test]
    fn exact_p_division_roundtrips() {
        let t = Tower::new(5, 1, 5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(37);
        let x = random_element(&t, &mut rng);
        let scaled = x.scale_u64(25);
        let back = scaled.div_exact_p(2).unwrap();
        assert!(back.same_value(&x).unwrap());
        assert_eq!(back.known_digits(), x.known_digits() - 2);
        assert!(matches!(
            t.one().div_exact_p(1),
            Err(Error::NotDivisible { .. })
        ));
    }

    #[test]
    fn lazy_shift_interacts_with_addition_and_trace() {
        let t = Tower::new(3, 1, 6).unwrap();
        // Π·x via shift vs via multiplication.
        let x = t.eta();
        let lazy = x.mul_pi_pow(3);
        let eager = x.mul(&t.pi().pow_u64(3).unwrap()).unwrap();
        assert!(lazy.same_value(&eager).unwrap());
        let sum = lazy.add(&t.one()).unwrap();
        let direct = eager.add(&t.one()).unwrap();
        assert!(sum.same_value(&direct).unwrap());
        // Formal division leaves the value intact under alignment.
        let frac = eager.mul_pi_pow(-3);
        assert_eq!(frac.pi_shift(), -3);
        assert!(frac.same_value(&x).unwrap());
        // Fractional trace: Tr(Π^{-1}·Π·η) = Tr(η) = −1.
        let frac2 = x.mul(&t.pi()).unwrap().mul_pi_pow(-1);
        let tr = frac2.trace_l_to_base().unwrap();
        let minus_one = PAdicScalar::from_i64(3, tr.precision(), -1).unwrap();
        assert_eq!(tr.value(), minus_one.value());
    }

    #[test]
    fn truncate_pi_keeps_low_terms_only() {
        let t = Tower::new(3, 1, 6).unwrap();
        // x = 1 + Π + 3·Π (val 3 part) — truncating at 2 keeps 1 + Π.
        let x = t
            .one()
            .add(&t.pi())
            .unwrap()
            .add(&t.pi().scale_u64(3))
            .unwrap();
        let tr = x.truncate_pi(2).unwrap();
        let expected = t.one().add(&t.pi()).unwrap();
        assert!(tr.same_value(&expected).unwrap());
        // Truncating at 0 gives zero.
        assert!(x.truncate_pi(0).unwrap().is_zero());
    }
}
