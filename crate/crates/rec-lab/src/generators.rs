//! The generator system of the formal module over the unramified extension.
//!
//! The formal module on the maximal ideal of `M` is generated, over the
//! group ring of `Gal(M/L)`, by elements `ξ, ω, θ_1, …, θ_{p−2}` subject
//! to a single relation `(σ −_F 1)(ω) = [p](ξ)`, where:
//!
//! - `ξ` is a formal-norm preimage of the torsion point: `N_F(ξ) = Π`;
//! - `θ_i` is a formal-norm preimage of `Exp(Π^{i+1})` for `1 ≤ i ≤ p−2`;
//! - `ω` trivializes the coboundary `[p]ξ` (a constructive Hilbert-90
//!   argument produces it, since the norm of `(1+ξ)^p` is `η^p = 1`).
//!
//! Both norm preimages are found by digit-wise successive approximation:
//! the multiplicative defect `(1 + target)/N_{M/L}(1 + current)` is driven
//! to `1` one Π-digit at a time, each digit obtained from the surjectivity
//! of the residue trace (the extension is unramified).
//!
//! On top of the system, [`decompose`] expresses any element of the module
//! as a formal-linear combination of generator conjugates by solving the
//! λ-linearized coordinate system over `ℤ/p^{N′}`, and
//! [`gamma_from_decomposition`] extracts the pairing exponent
//! `γ ≡ (p/p^m)·Σ c_j (mod p)` from the `ω`-coefficients.

use crate::arith::{checked_prime_power, inv_mod, mul_mod, sub_mod, val_p_u64};
use crate::error::{Error, Result};
use crate::fgl::{f_add, f_exp, f_int_mult_i64, f_log, f_norm_operator, TorsionPoint};
use crate::padic::PAdicScalar;
use crate::tower::{Tower, TowerElement};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde_json::json;

/// Seed for the pseudorandom fallback of the Hilbert-90 candidate sweep.
const COBOUNDARY_CANDIDATE_SEED: u64 = 0x006F_6D65_6761; // "omega" in ASCII

/// An element `χ` with `Tr_{M/L}(χ) = 1` exactly at working precision.
///
/// Starts from a lift of the trace-one residue element and applies the
/// quadratic correction `χ ← χ + (1 − Tr χ)·χ`, which squares the error
/// `1 − Tr χ` each pass.
pub fn chi(tower: &Tower) -> Result<TowerElement> {
    let mut x = tower.from_residue(tower.trace_one_residue())?;
    for _ in 0..64 {
        let tr = x.trace_to_l()?;
        let err = tower.one().sub(&tr)?;
        if err.is_zero() {
            return Ok(x);
        }
        x = x.add(&err.mul(&x)?)?;
    }
    Err(Error::ConvergenceStall(
        "trace-one correction did not reach exactness".into(),
    ))
}

/// Residue of `e / Π^v` for an element with exact Π-valuation `v`,
/// extracted without spending precision: with `v = a(p−1) + r`, the grid
/// row `r` carries the leading digit as `p^a·(unit)`, and the division by
/// `Π^v = Π^r·p^a·w^a` contributes the residue factor `w̄^{−a} = (−1)^a`.
fn leading_residue(e: &TowerElement, v: i64) -> Result<crate::residue::ResidueElement> {
    let e = e.materialized()?;
    let t = e.tower().clone();
    let p = t.prime();
    let r = (v % (p as i64 - 1)) as usize;
    let a = (v / (p as i64 - 1)) as u32;
    let pa = checked_prime_power(p, a).ok_or(Error::PrecisionTooHigh {
        prime: p,
        precision: a,
    })?;
    let mut coeffs = Vec::with_capacity(t.residue_degree());
    for j in 0..t.residue_degree() {
        let c = e.grid()[r][j];
        coeffs.push((c / pa) % p);
    }
    let res = t.residue_field().element(&coeffs)?;
    Ok(if a % 2 == 1 { res.neg() } else { res })
}

/// Digit-wise solution of `N_{M/L}(1 + result) = 1 + target`, starting
/// from `seed` (whose first defect digit must already sit at Π-level ≥ 2).
fn norm_preimage(
    tower: &Tower,
    target: &TowerElement,
    seed: &TowerElement,
) -> Result<TowerElement> {
    let one = tower.one();
    let goal = one.add(target)?;
    let tau = tower.trace_one_residue().clone();
    let mut cur = seed.clone();
    let mut prev_v: i64 = 1;
    let cap = (tower.prime() - 1) as i64 * (tower.working_precision() as i64 + 2) + 8;
    for _ in 0..cap {
        let norm = f_norm_operator(&cur)?;
        let defect = goal.mul(&one.add(&norm)?.inv()?)?.sub(&one)?;
        let limit = (tower.prime() - 1) as i64 * defect.known_digits() as i64;
        let pv = defect.pi_val();
        if pv.lower_bound() >= limit {
            return Ok(cur);
        }
        let v = pv.lower_bound();
        if v <= prev_v {
            return Err(Error::ConvergenceStall(format!(
                "norm-preimage defect stalled at Π-level {v}"
            )));
        }
        prev_v = v;
        // Solve tr(c̄) = leading residue of the defect; the trace is onto,
        // so c̄ = (leading)·τ̄ works with tr(τ̄) = 1.
        let lead = leading_residue(&defect, v)?;
        let correction = tower.from_residue(&lead.mul(&tau)?)?;
        let step = one.add(&correction.mul(&tower.pi().pow_u64(v as u64)?)?)?;
        cur = one.add(&cur)?.mul(&step)?.sub(&one)?;
    }
    Err(Error::ConvergenceStall(
        "norm-preimage iteration budget exhausted".into(),
    ))
}

/// The generator `ξ`: `N_F(ξ) = Π` at precision, with `ξ ≡ Πχ mod Π²`.
pub fn xi(tower: &Tower, chi: &TowerElement) -> Result<TowerElement> {
    norm_preimage(tower, &tower.pi(), &tower.pi().mul(chi)?)
}

/// The generator `θ_i` (`1 ≤ i ≤ p−2`): `N_F(θ_i) = Exp(Π^{i+1})`.
pub fn theta(tower: &Tower, chi: &TowerElement, i: usize) -> Result<TowerElement> {
    if i == 0 || i > tower.prime() as usize - 2 {
        return Err(Error::InvalidArgument(format!(
            "θ index must lie in [1, {}], got {i}",
            tower.prime() - 2
        )));
    }
    let pi_pow = tower.pi().pow_u64(i as u64 + 1)?;
    let target = f_exp(&pi_pow)?;
    norm_preimage(tower, &target, &pi_pow.mul(chi)?)
}

/// The generator `ω` with `(σ −_F 1)(ω) = [p](ξ)` (constructive
/// Hilbert 90 for the unramified extension).
pub fn omega(tower: &Tower, xi: &TowerElement) -> Result<TowerElement> {
    omega_with_candidate_offset(tower, xi, 0)
}

/// Same as [`omega`], starting the candidate sweep at `offset` (used to
/// exhibit that different candidates give cohomologous answers).
fn omega_with_candidate_offset(
    tower: &Tower,
    xi: &TowerElement,
    offset: usize,
) -> Result<TowerElement> {
    let one = tower.one();
    let p = tower.prime();
    let d = tower.residue_degree();
    let v = one.add(xi)?.pow_u64(p)?; // (1+ξ)^p, of norm η^p = 1
    let mut nv = one.clone();
    for k in 0..d {
        nv = nv.mul(&v.sigma(k))?;
    }
    if !nv.same_value(&one)? {
        return Err(Error::ConstructionFailed(
            "norm of (1+ξ)^p is not 1; ξ does not solve its norm equation".into(),
        ));
    }
    // Prefix products P_k = Π_{i<k} σ^i(v), so that b = Σ_k P_k·σ^k(α)
    // satisfies σ(b) = b/v for every α.
    let mut prefixes = Vec::with_capacity(d);
    let mut acc = one.clone();
    for k in 0..d {
        prefixes.push(acc.clone());
        acc = acc.mul(&v.sigma(k))?;
    }
    let build = |alpha: &TowerElement| -> Result<Option<TowerElement>> {
        let mut b = tower.zero();
        for (k, pref) in prefixes.iter().enumerate() {
            b = b.add(&pref.mul(&alpha.sigma(k))?)?;
        }
        if b.residue()?.is_zero() {
            return Ok(None); // not a unit; try the next candidate
        }
        let w = b.inv()?;
        // σ(w)/w = v and v ≡ 1 mod Π force the residue of w into the
        // prime field; its Teichmüller lift is σ-fixed, so dividing by it
        // lands w in the 1-units without disturbing the coboundary.
        let r = w.residue()?;
        if !r.is_prime_field() {
            return Err(Error::ConstructionFailed(
                "coboundary unit has a residue outside the prime field".into(),
            ));
        }
        let teich =
            PAdicScalar::new(p, tower.working_precision(), r.constant_part())?.teichmuller();
        let w1 = w.scale_u64(teich.inv_unit()?.value());
        let omega = w1.sub(&one)?;
        // Verify the defining relation before accepting.
        let lhs = one
            .add(&omega.sigma(1))?
            .mul(&one.add(&omega)?.inv()?)?
            .sub(&one)?;
        let rhs = v.sub(&one)?;
        if !lhs.same_value(&rhs)? {
            return Err(Error::ConstructionFailed(
                "coboundary candidate fails the defining relation".into(),
            ));
        }
        Ok(Some(omega))
    };
    // Deterministic sweep over basis monomials u^j, then seeded draws.
    let mut candidates: Vec<TowerElement> = Vec::new();
    for j in 0..d {
        candidates.push(tower.monomial(0, j, 1)?);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(COBOUNDARY_CANDIDATE_SEED);
    for _ in 0..64 {
        let r = tower.residue_field().random(&mut rng);
        candidates.push(tower.from_residue(&r)?);
    }
    for alpha in candidates.into_iter().skip(offset) {
        if let Some(omega) = build(&alpha)? {
            return Ok(omega);
        }
    }
    Err(Error::NoUnitCandidate)
}

/// Evaluates the explicit partial-sum expression for `Tr_{M/L}(λω)`
/// directly from `χ` and `λξ`:
///
/// `−p · Tr_{M/L}( Σ_{k=1}^{p^m − 1} σ^k(χ) · Σ_{t=0}^{k−1} σ^t(λξ) )`.
///
/// Any valid `ω` has `Tr_{M/L}(λω)` equal to this value modulo the
/// coboundary ambiguity (a σ-fixed shift contributes `p^m·λ(t) ∈ p^m·𝔪²`),
/// so agreement holds modulo `pΠ²`.
pub fn coboundary_trace_log(
    tower: &Tower,
    xi: &TowerElement,
    chi: &TowerElement,
) -> Result<TowerElement> {
    let lam = f_log(xi)?;
    let d = tower.residue_degree();
    let mut acc = tower.zero();
    let mut prefix = tower.zero(); // Σ_{t<k} σ^t(λξ)
    for k in 1..d {
        prefix = prefix.add(&lam.sigma(k - 1))?;
        acc = acc.add(&chi.sigma(k).mul(&prefix)?)?;
    }
    Ok(acc.trace_to_l()?.scale_i64(-(tower.prime() as i64)))
}

/// One machine-checked invariant of a generator system.
#[derive(Debug, Clone)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// The constructed generator system with its cached λ-values.
#[derive(Debug, Clone)]
pub struct GeneratorSystem {
    tower: Tower,
    chi: TowerElement,
    xi: TowerElement,
    omega: TowerElement,
    thetas: Vec<TowerElement>,
    zeta: TorsionPoint,
    big_omega: TowerElement,
    /// λ-values of the norms of the θ generators (each equals `Π^{i+1}`
    /// at declared precision).
    epsilons: Vec<TowerElement>,
    lambda_big_omega: TowerElement,
    lambda_xi: TowerElement,
    lambda_omega: TowerElement,
    lambda_thetas: Vec<TowerElement>,
}

impl GeneratorSystem {
    /// Builds `χ, ξ, ω, θ_i, ζ, Ω` and machine-checks every defining
    /// invariant before returning.
    pub fn construct(tower: &Tower) -> Result<Self> {
        let p = tower.prime();
        let chi_elt = chi(tower)?;
        let xi_elt = xi(tower, &chi_elt)?;
        let omega_elt = omega(tower, &xi_elt)?;
        let mut thetas = Vec::new();
        for i in 1..=(p as usize - 2) {
            thetas.push(theta(tower, &chi_elt, i)?);
        }
        let zeta = TorsionPoint::new(tower.pi(), 1)?;
        let big_omega = f_norm_operator(&omega_elt)?;
        let lambda_big_omega = f_log(&big_omega)?;
        let lambda_xi = f_log(&xi_elt)?;
        let lambda_omega = f_log(&omega_elt)?;
        let mut lambda_thetas = Vec::new();
        let mut epsilons = Vec::new();
        for th in &thetas {
            lambda_thetas.push(f_log(th)?);
            let mut eps = f_log(&f_norm_operator(th)?)?;
            eps.set_known(eps.known_digits().min(tower.declared_precision()));
            epsilons.push(eps);
        }
        let sys = GeneratorSystem {
            tower: tower.clone(),
            chi: chi_elt,
            xi: xi_elt,
            omega: omega_elt,
            thetas,
            zeta,
            big_omega,
            epsilons,
            lambda_big_omega,
            lambda_xi,
            lambda_omega,
            lambda_thetas,
        };
        sys.verify()?;
        Ok(sys)
    }

    /// The defect of the single relation: `(σ −_F 1)(ω) −_F [p](ξ)`,
    /// zero at precision for a correct system.
    pub fn relation_residual(&self) -> Result<TowerElement> {
        let one = self.tower.one();
        let lhs = one
            .add(&self.omega.sigma(1))?
            .mul(&one.add(&self.omega)?.inv()?)?
            .sub(&one)?;
        let rhs = f_int_mult_i64(self.tower.prime() as i64, &self.xi)?;
        crate::fgl::f_sub(&lhs, &rhs)
    }

    /// Machine-checks every defining invariant, one row per check.
    pub fn invariant_report(&self) -> Result<Vec<InvariantCheck>> {
        let t = &self.tower;
        let p = t.prime();
        let mut rows = Vec::new();
        let mut push = |name: &'static str, passed: bool, detail: String| {
            rows.push(InvariantCheck {
                name,
                passed,
                detail,
            });
        };
        let norm_xi = f_norm_operator(&self.xi)?;
        push(
            "norm_of_xi",
            norm_xi.same_value(&t.pi())?,
            "N_F(ξ) = Π at working precision".into(),
        );
        let residual = self.relation_residual()?;
        push(
            "single_relation",
            residual.same_value(&t.zero())?,
            "(σ −_F 1)(ω) = [p](ξ) at working precision".into(),
        );
        let diff = self.xi.sub(&t.pi().mul(&self.chi)?)?;
        let v = diff.pi_val().lower_bound();
        push(
            "xi_leading_term",
            v >= 2,
            format!("ξ − Πχ has Π-valuation {v} (need ≥ 2)"),
        );
        let mut theta_ok = true;
        for (idx, eps) in self.epsilons.iter().enumerate() {
            let want = t.pi().pow_u64(idx as u64 + 2)?;
            if !eps.same_value(&want)? {
                theta_ok = false;
            }
        }
        push(
            "theta_norm_logs",
            theta_ok,
            format!("λ(N_F θ_i) = Π^(i+1) for i = 1..{}", p - 2),
        );
        let shifted = self.lambda_big_omega.add(&t.pi().scale_u64(p))?;
        let sv = shifted.pi_val().lower_bound();
        push(
            "lambda_Omega_congruence",
            sv > p as i64,
            format!("λΩ + pΠ has Π-valuation {sv} (need ≥ {})", p + 1),
        );
        let scalar = self
            .lambda_big_omega
            .mul(&t.eta())?
            .mul_pi_pow(-1)
            .trace_l_to_base()?;
        let target = PAdicScalar::new(p, scalar.precision(), p % scalar.modulus())?;
        let congruent = scalar.checked_sub(&target)?.val_p().at_least(2);
        push(
            "eta_twisted_trace_of_lambda_Omega",
            congruent,
            format!("Tr(Π⁻¹ηλΩ) = {} ≡ p mod p²", scalar.value()),
        );
        Ok(rows)
    }

    /// Re-checks the defining invariants of the system.
    pub fn verify(&self) -> Result<()> {
        for row in self.invariant_report()? {
            if !row.passed {
                return Err(Error::ConstructionFailed(format!(
                    "generator-system invariant '{}' failed: {}",
                    row.name, row.detail
                )));
            }
        }
        Ok(())
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn chi(&self) -> &TowerElement {
        &self.chi
    }

    pub fn xi(&self) -> &TowerElement {
        &self.xi
    }

    pub fn omega(&self) -> &TowerElement {
        &self.omega
    }

    pub fn thetas(&self) -> &[TowerElement] {
        &self.thetas
    }

    pub fn zeta(&self) -> &TorsionPoint {
        &self.zeta
    }

    pub fn big_omega(&self) -> &TowerElement {
        &self.big_omega
    }

    /// λ-values of the θ-norms (each `= Π^{i+1}` at precision).
    pub fn epsilons(&self) -> &[TowerElement] {
        &self.epsilons
    }

    pub fn lambda_big_omega(&self) -> &TowerElement {
        &self.lambda_big_omega
    }

    /// JSON snapshot of the whole system for inspection and regression
    /// comparisons (elements in the grid JSON encoding).
    pub fn snapshot_json(&self) -> Result<serde_json::Value> {
        let enc = |x: &TowerElement| -> Result<serde_json::Value> {
            let s = crate::tower::encode_json(x)?;
            Ok(serde_json::from_str(&s).expect("freshly encoded JSON is valid"))
        };
        let thetas: Result<Vec<_>> = self.thetas.iter().map(enc).collect();
        let epsilons: Result<Vec<_>> = self.epsilons.iter().map(enc).collect();
        Ok(json!({
            "p": self.tower.prime(),
            "m": self.tower.height(),
            "precision": self.tower.declared_precision(),
            "chi": enc(&self.chi)?,
            "xi": enc(&self.xi)?,
            "omega": enc(&self.omega)?,
            "thetas": thetas?,
            "zeta": { "element": enc(self.zeta.zeta())?, "level": self.zeta.level() },
            "big_omega": enc(&self.big_omega)?,
            "lambda_big_omega": enc(&self.lambda_big_omega)?,
            "epsilons": epsilons?,
        }))
    }
}

/// Coefficients expressing `y` through generator conjugates after
/// λ-linearization: `λy = Σ_{ij} d[i][j]·σ^j(λθ_{i+1}) + Σ_j c[j]·σ^j(λω)
/// + Σ_j b[j]·σ^j(λξ)`, all over `ℤ/p^{N′}`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    /// Per-conjugate θ coefficients: row `i` (0-based) belongs to `θ_{i+1}`.
    pub d: Vec<Vec<PAdicScalar>>,
    /// ω-conjugate coefficients; their sum determines γ.
    pub c: Vec<PAdicScalar>,
    /// ξ-conjugate coefficients (determined only up to the torsion shift).
    pub b: Vec<PAdicScalar>,
    precision: u32,
}

impl Decomposition {
    /// Guaranteed digit precision `N′ = N − m − 1` of the coefficients.
    pub fn precision(&self) -> u32 {
        self.precision
    }
}

fn val_capped(v: u64, p: u64, cap: u32) -> u32 {
    if v == 0 {
        cap
    } else {
        val_p_u64(v, p).unwrap_or(0).min(cap)
    }
}

/// Gaussian elimination over `ℤ/p^k`. Each step pivots on the entry of
/// globally minimal p-valuation in the remaining submatrix, so pivot
/// valuations never decrease; every entry to the right of a pivot then
/// has at least the pivot's valuation, which makes the back-substitution
/// divisions exact whenever the system is consistent. Returns the
/// solution (free variables set to zero) and the maximal pivot valuation
/// spent.
fn solve_linear_mod_p_power(mut rows: Vec<Vec<u64>>, p: u64, k: u32) -> Result<(Vec<u64>, u32)> {
    let modulus = checked_prime_power(p, k).ok_or(Error::PrecisionTooHigh {
        prime: p,
        precision: k,
    })?;
    let nrows = rows.len();
    let ncols = rows[0].len() - 1;
    let mut pivoted = vec![false; ncols];
    let mut pivots: Vec<(usize, usize, u32)> = Vec::new();
    let mut rank = 0usize;
    while rank < nrows {
        let mut best: Option<(usize, usize, u32)> = None;
        'scan: for r in rank..nrows {
            for c in 0..ncols {
                if pivoted[c] || rows[r][c] == 0 {
                    continue;
                }
                let v = val_capped(rows[r][c], p, k);
                if v < k && best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((r, c, v));
                    if v == 0 {
                        break 'scan;
                    }
                }
            }
        }
        let Some((br, col, bv)) = best else { break };
        rows.swap(rank, br);
        let pw = checked_prime_power(p, bv).expect("bv < k");
        let pivot_unit = rows[rank][col] / pw;
        let pivot_inv = inv_mod(pivot_unit % modulus, modulus).expect("unit by construction");
        for r in rank + 1..nrows {
            let e = rows[r][col];
            if e == 0 {
                continue;
            }
            // e has valuation ≥ bv by pivot minimality: the division is exact.
            let factor = mul_mod(e / pw, pivot_inv, modulus);
            if factor == 0 {
                continue;
            }
            for c in 0..=ncols {
                let delta = mul_mod(factor, rows[rank][c], modulus);
                rows[r][c] = sub_mod(rows[r][c], delta, modulus);
            }
        }
        pivoted[col] = true;
        pivots.push((rank, col, bv));
        rank += 1;
    }
    // Rows without a pivot are now zero in every variable column; a
    // nonzero right-hand side there means the system is inconsistent.
    for row in rows.iter().skip(rank) {
        if row[ncols] != 0 {
            return Err(Error::NoSolution);
        }
    }
    let mut solution = vec![0u64; ncols];
    let mut max_val = 0u32;
    for &(r, col, v) in pivots.iter().rev() {
        let mut num = rows[r][ncols];
        for c in 0..ncols {
            if c != col && rows[r][c] != 0 && solution[c] != 0 {
                num = sub_mod(num, mul_mod(rows[r][c], solution[c], modulus), modulus);
            }
        }
        if val_capped(num, p, k) < v {
            return Err(Error::NoSolution);
        }
        let pw = checked_prime_power(p, v).expect("v < k");
        let pivot_unit = rows[r][col] / pw;
        let pivot_inv = inv_mod(pivot_unit % modulus, modulus).expect("unit");
        solution[col] = mul_mod(num / pw, pivot_inv, modulus);
        max_val = max_val.max(v);
    }
    Ok((solution, max_val))
}

/// The λ-columns of the decomposition system, in the unknown order
/// `d_{1,0..}, …, d_{p−2,0..}, c_0.., b_0..`.
fn decomposition_columns(gens: &GeneratorSystem) -> Result<Vec<TowerElement>> {
    let d = gens.tower.residue_degree();
    let mut cols = Vec::new();
    for lam_theta in &gens.lambda_thetas {
        for j in 0..d {
            cols.push(lam_theta.sigma(j).materialized()?);
        }
    }
    for j in 0..d {
        cols.push(gens.lambda_omega.sigma(j).materialized()?);
    }
    for j in 0..d {
        cols.push(gens.lambda_xi.sigma(j).materialized()?);
    }
    Ok(cols)
}

fn flatten_grid(x: &TowerElement, modulus: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for row in x.grid() {
        for &v in row {
            out.push(v % modulus);
        }
    }
    out
}

/// Expresses `y` through the generator system (see [`Decomposition`]).
pub fn decompose(gens: &GeneratorSystem, y: &TowerElement) -> Result<Decomposition> {
    decompose_with_column_order(gens, y, None)
}

/// Same solve with a pseudorandom column permutation — γ must not depend
/// on the pivoting path, and tests exercise exactly that.
pub fn decompose_shuffled(
    gens: &GeneratorSystem,
    y: &TowerElement,
    seed: u64,
) -> Result<Decomposition> {
    let ncols = gens.tower.prime() as usize * gens.tower.residue_degree();
    let mut order: Vec<usize> = (0..ncols).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    decompose_with_column_order(gens, y, Some(order))
}

fn decompose_with_column_order(
    gens: &GeneratorSystem,
    y: &TowerElement,
    order: Option<Vec<usize>>,
) -> Result<Decomposition> {
    let t = &gens.tower;
    let p = t.prime();
    let m = t.height();
    let d = t.residue_degree();
    if y.pi_val().lower_bound() < 1 {
        return Err(Error::NotInMaximalIdeal);
    }
    let declared = t.declared_precision();
    if declared < m + 2 {
        return Err(Error::PrecisionTooLow {
            required: m + 2,
            actual: declared,
        });
    }
    let target_prec = declared - m - 1; // N′
    let lam_y = f_log(y)?.materialized()?;
    let columns = decomposition_columns(gens)?;
    let k_sys = columns
        .iter()
        .map(|c| c.known_digits())
        .chain(std::iter::once(lam_y.known_digits()))
        .min()
        .expect("nonempty");
    let modulus = checked_prime_power(p, k_sys).ok_or(Error::PrecisionTooHigh {
        prime: p,
        precision: k_sys,
    })?;
    let col_vectors: Vec<Vec<u64>> = columns.iter().map(|c| flatten_grid(c, modulus)).collect();
    let rhs = flatten_grid(&lam_y, modulus);
    let ncols = col_vectors.len();
    let order = order.unwrap_or_else(|| (0..ncols).collect());
    let nrows = rhs.len();
    let mut rows = Vec::with_capacity(nrows);
    for r in 0..nrows {
        let mut row = Vec::with_capacity(ncols + 1);
        for &c in &order {
            row.push(col_vectors[c][r]);
        }
        row.push(rhs[r]);
        rows.push(row);
    }
    let (permuted, max_val) = solve_linear_mod_p_power(rows, p, k_sys)?;
    if max_val > m + 1 {
        return Err(Error::ConstructionFailed(format!(
            "elimination spent {max_val} digits, over the documented budget of {}",
            m + 1
        )));
    }
    if k_sys < target_prec + max_val {
        return Err(Error::PrecisionTooLow {
            required: target_prec + max_val,
            actual: k_sys,
        });
    }
    let mut solution = vec![0u64; ncols];
    for (slot, &c) in order.iter().enumerate() {
        solution[c] = permuted[slot];
    }
    // Substitution check at the guaranteed precision.
    let check_mod = checked_prime_power(p, target_prec).expect("below k_sys");
    for r in 0..nrows {
        let mut acc = 0u64;
        for (c, vec) in col_vectors.iter().enumerate() {
            acc = crate::arith::add_mod(
                acc,
                mul_mod(vec[r] % check_mod, solution[c] % check_mod, check_mod),
                check_mod,
            );
        }
        if acc != rhs[r] % check_mod {
            return Err(Error::NoSolution);
        }
    }
    let scalar = |v: u64| PAdicScalar::new(p, target_prec, v % check_mod);
    let n_theta = p as usize - 2;
    let mut dmat = Vec::with_capacity(n_theta);
    for i in 0..n_theta {
        let row: Result<Vec<_>> = (0..d).map(|j| scalar(solution[i * d + j])).collect();
        dmat.push(row?);
    }
    let c_coeffs: Result<Vec<_>> = (0..d).map(|j| scalar(solution[n_theta * d + j])).collect();
    let b_coeffs: Result<Vec<_>> = (0..d)
        .map(|j| scalar(solution[(n_theta + 1) * d + j]))
        .collect();
    Ok(Decomposition {
        d: dmat,
        c: c_coeffs?,
        b: b_coeffs?,
        precision: target_prec,
    })
}

/// Full-precision pairing exponent `(p/p^m)·Σ c_j` (before reduction
/// mod p); requires `p^{m−1} | Σ c_j`.
fn gamma_full(dec: &Decomposition, tower: &Tower) -> Result<PAdicScalar> {
    let p = tower.prime();
    let mut sum = PAdicScalar::zero(p, dec.precision)?;
    for c in &dec.c {
        sum = sum.checked_add(c)?;
    }
    sum.div_exact_p(tower.height() - 1)
}

/// The pairing exponent `γ ≡ (p/p^m)·Σ c_j (mod p)` of a decomposition.
pub fn gamma_from_decomposition(dec: &Decomposition, tower: &Tower) -> Result<PAdicScalar> {
    gamma_full(dec, tower)?.reduce_precision(1)
}

/// Residual of the trace-reduced equation
/// `λx = Σ_i p·d_i·Π^{i+1} + γ·λΩ`, with `d_i` read off a decomposition
/// of `y` (where `x = [p]y`) and `γ = (p/p^m)·Σ c_j` at full precision.
///
/// The θ-coefficients must not depend on the conjugate index
/// (`SigmaVarianceDetected` otherwise) — this is exactly the condition
/// under which the formal norm collapses the decomposition to the
/// displayed equation. The returned residual carries the precision
/// actually guaranteed; it must compare equal to zero.
pub fn verify_main_equation(
    x: &TowerElement,
    dec: &Decomposition,
    gens: &GeneratorSystem,
) -> Result<TowerElement> {
    let t = &gens.tower;
    let p = t.prime();
    for row in &dec.d {
        if row.iter().any(|s| s.value() != row[0].value()) {
            return Err(Error::SigmaVarianceDetected);
        }
    }
    let gamma = gamma_full(dec, t)?;
    let lam_x = f_log(x)?;
    let mut residual = lam_x;
    for (i, row) in dec.d.iter().enumerate() {
        let term = t
            .pi()
            .pow_u64(i as u64 + 2)?
            .scale_u64(row[0].value())
            .scale_u64(p);
        residual = residual.sub(&term)?;
    }
    residual = residual.sub(&gens.lambda_big_omega.scale_u64(gamma.value()))?;
    let guaranteed = gamma.precision().min(residual.known_digits());
    residual.set_known(guaranteed);
    Ok(residual)
}

/// A module element with a prescribed coboundary class: `σy −_F y = [K]ζ`
/// holds exactly, so `x = [p]y` is σ-fixed (lies in `L`) and the pairing
/// exponent of `x` is `K mod p`.
#[derive(Debug, Clone)]
pub struct ValidSample {
    pub y: TowerElement,
    pub x: TowerElement,
    /// The exact integer `K = (p/p^m)·Σ c_j` used in the construction.
    pub coboundary_class: i64,
    /// `K mod p` — the expected symbol exponent.
    pub gamma: u64,
}

/// Draws a random formal-linear combination of generator conjugates whose
/// ξ-coefficients are corrected so that `σy −_F y = [K]ζ` exactly:
/// with `b_j − b_{j−1} = p·c_j − K`, the coboundary telescopes to
/// `Σ_j [K]σ^j(ξ) = [K]·N_F(ξ) = [K]ζ`.
pub fn sample_valid_input(gens: &GeneratorSystem, rng: &mut impl Rng) -> Result<ValidSample> {
    let t = &gens.tower;
    let p = t.prime();
    let m = t.height();
    let d = t.residue_degree();
    let span = p * p;
    // c_j with Σc ≡ 0 mod p^{m−1} so that K = p·Σc/p^m is an integer.
    let chunk = checked_prime_power(p, m - 1).expect("small");
    let mut c: Vec<i64> = (0..d - 1)
        .map(|_| rng.random_range(0..span as i64))
        .collect();
    let partial: i64 = c.iter().sum();
    let residue = partial.rem_euclid(chunk as i64);
    let mut last = (chunk as i64 - residue).rem_euclid(chunk as i64);
    let headroom = (span as i64 - 1 - last) / chunk as i64;
    if headroom > 0 {
        last += chunk as i64 * rng.random_range(0..=headroom);
    }
    c.push(last);
    let total: i64 = c.iter().sum();
    let k_class = p as i64 * total / checked_prime_power(p, m).expect("small") as i64;
    let b0 = rng.random_range(0..span as i64);
    let mut b = vec![b0];
    for j in 1..d {
        b.push(b[j - 1] + p as i64 * c[j] - k_class);
    }
    let mut y = t.zero();
    for th in gens.thetas.iter() {
        let di = rng.random_range(0..span as i64);
        for j in 0..d {
            y = f_add(&y, &f_int_mult_i64(di, &th.sigma(j))?)?;
        }
    }
    for (j, &cj) in c.iter().enumerate() {
        y = f_add(&y, &f_int_mult_i64(cj, &gens.omega.sigma(j))?)?;
    }
    for (j, &bj) in b.iter().enumerate() {
        y = f_add(&y, &f_int_mult_i64(bj, &gens.xi.sigma(j))?)?;
    }
    let x = f_int_mult_i64(p as i64, &y)?;
    if !x.is_l_valued() {
        return Err(Error::ConstructionFailed(
            "constructed [p]y failed to be σ-fixed".into(),
        ));
    }
    Ok(ValidSample {
        y,
        x,
        coboundary_class: k_class,
        gamma: k_class.rem_euclid(p as i64) as u64,
    })
}
