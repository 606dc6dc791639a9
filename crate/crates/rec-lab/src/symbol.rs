//! The generalized Hilbert symbol `(t, x)` for the unramified division
//! of the isogeny, computed by four independent routes:
//!
//! 1. **direct** — solve `[p](y) = x` digit-by-digit over the unramified
//!    tower, then read `γ` off the Frobenius cocycle
//!    `(1+σy)/(1+y) = η^γ`. This is the defining oracle.
//! 2. **artin_hasse** — the closed trace formula
//!    `γ = (1/p)·Tr_{L/K}(Π^{−1}·η·λx) mod p`.
//! 3. **trace_equation** — `γ = Tr(Π^{−1}ηλx) / Tr(Π^{−1}ηλΩ) mod p`,
//!    with the denominator computed from the constructed `Ω = N_F(ω)`
//!    rather than from its closed-form evaluation.
//! 4. **borevich** — decompose the certificate `y` over the generator
//!    system and evaluate `γ = (p/p^m)·Σ c_j mod p`.
//!
//! ## The validity domain, and why routes 2–3 gate on it explicitly
//!
//! The pairing is defined for `x ∈ [p]F(𝔪_M) ∩ F(𝔪_L)` with `M/L`
//! unramified. Digit analysis of `(1+y)^p = 1+x` shows this set is
//! exactly `{x ∈ F(𝔪_L) : x = 0 or v_Π(x) ≥ p}`: a correction at
//! Π-level `t` moves the defect at level `min(pt, t+p−1) ≥ p`, so any
//! defect at level `< p` is unreachable (that digit would force a
//! ramified root), while a level-`p` defect leads to the residue
//! equation `g^p − g = e` whose right side lies in `𝔽_p` and therefore
//! has zero absolute trace in `𝔽_{p^{p^m}}` — always solvable there.
//!
//! The trace formula cannot detect membership on its own: `λ` kills
//! torsion, so `x` and the invalid `x +_F ζ` have *identical* `λx` and
//! the divisibility of the trace by `p` holds for every `x ∈ F(𝔪_L)`
//! (here `λ(F(𝔪_L)) ⊆ 𝔪²` since residues of `L` are prime-field, and
//! `Tr_{L/K}(𝔪) ⊆ pℤ_p`). The formula is only *correct under the
//! hypothesis*, so the hypothesis — the valuation bound above — is
//! checked explicitly and violations are reported as `NotDivisible`,
//! keeping the membership verdict aligned with the direct route's
//! `NoRootInM`.

use crate::arith::inv_mod;
use crate::error::{Error, Result};
use crate::fgl::{f_int_mult_i64, f_log, f_sub};
use crate::generators::{
    decompose, gamma_from_decomposition, sample_valid_input, GeneratorSystem, ValidSample,
};
use crate::tower::{parse_element, Tower, TowerElement};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde_json::json;

/// A computation route for `γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Direct,
    ArtinHasse,
    TraceEquation,
    Borevich,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::ArtinHasse => "artin_hasse",
            Method::TraceEquation => "trace_equation",
            Method::Borevich => "borevich",
        }
    }

    pub const ALL: [Method; 4] = [
        Method::Direct,
        Method::ArtinHasse,
        Method::TraceEquation,
        Method::Borevich,
    ];
}

/// One computed symbol value: `(Π, x) = [γ]ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolResult {
    /// The exponent, in `[0, p)`.
    pub gamma: u64,
    pub method: Method,
    /// The declared precision of the primary run.
    pub precision_used: u32,
    /// Whether a rerun at precision `N+2` produced the same `γ`.
    pub stable: bool,
}

impl SymbolResult {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "gamma": self.gamma,
            "method": self.method.as_str(),
            "precision_used": self.precision_used,
            "stable": self.stable,
        })
    }
}

/// An input in the pairing's domain together with its division
/// certificate: `[p](certificate) = x` at precision.
#[derive(Debug, Clone)]
pub struct ValidInput {
    x: TowerElement,
    certificate: TowerElement,
}

impl ValidInput {
    /// Checks the certificate before accepting.
    pub fn new(x: TowerElement, certificate: TowerElement) -> Result<Self> {
        if !x.is_l_valued() {
            return Err(Error::NotInBaseField);
        }
        let image = f_int_mult_i64(x.tower().prime() as i64, &certificate)?;
        if !f_sub(&image, &x)?.same_value(&x.tower().zero())? {
            return Err(Error::ConstructionFailed(
                "certificate does not divide the input".into(),
            ));
        }
        Ok(ValidInput { x, certificate })
    }

    pub fn x(&self) -> &TowerElement {
        &self.x
    }

    pub fn certificate(&self) -> &TowerElement {
        &self.certificate
    }
}

/// The explicit domain test `x = 0 ∨ v_Π(x) ≥ p` (see module docs for
/// the derivation that this equals `[p]F(𝔪_M) ∩ F(𝔪_L)`).
pub fn require_symbol_hypothesis(tower: &Tower, x: &TowerElement) -> Result<()> {
    if !x.is_l_valued() {
        return Err(Error::NotInBaseField);
    }
    let v = x.pi_val().lower_bound();
    if v < 1 {
        return Err(Error::NotInMaximalIdeal);
    }
    if v < tower.prime() as i64 {
        return Err(Error::NotDivisible {
            required: tower.prime() as i64,
            available: v,
        });
    }
    Ok(())
}

/// Solves `(1+y)^p = 1+x` digit-by-digit over `M`, raising the defect's
/// Π-level by at least one per step. At the critical level `p` the digit
/// satisfies the Frobenius-affine residue equation `g^p − g = e`; above
/// it the equation is linear (`−g = e`, the sign from `Π^{p−1}/p ≡ −1`).
/// A defect at level `< p` means no root exists in any unramified
/// extension.
pub fn divide_isogeny(tower: &Tower, x: &TowerElement) -> Result<TowerElement> {
    if !x.is_l_valued() {
        return Err(Error::NotInBaseField);
    }
    if x.pi_val().lower_bound() < 1 {
        return Err(Error::NotInMaximalIdeal);
    }
    let p = tower.prime();
    let one = tower.one();
    let goal = one.add(x)?;
    let mut y = tower.zero();
    let mut prev_v = 0i64;
    let cap = (p - 1) as i64 * (tower.working_precision() as i64 + 2) + 8;
    for _ in 0..cap {
        let power = one.add(&y)?.pow_u64(p)?;
        let defect = goal.mul(&power.inv()?)?.sub(&one)?;
        let limit = (p - 1) as i64 * defect.known_digits() as i64;
        let pv = defect.pi_val();
        if pv.lower_bound() >= limit {
            // The defect vanishes below Π-level (p−1)·K, which pins y only
            // up to corrections at level (p−1)·(K−1): a root is one p-digit
            // less precise than the power it was extracted from.
            let guaranteed = defect.known_digits().saturating_sub(1).max(1);
            y.set_known(y.known_digits().min(guaranteed));
            return Ok(y);
        }
        let v = pv.lower_bound();
        if v < p as i64 {
            return Err(Error::NoRootInM { pi_level: v });
        }
        if v <= prev_v {
            return Err(Error::ConvergenceStall(format!(
                "isogeny-division defect stalled at Π-level {v}"
            )));
        }
        prev_v = v;
        let t = v - (p as i64 - 1);
        let e_bar = leading_residue_of(&defect, v)?;
        let g_bar = if t == 1 {
            let minus_one = tower.residue_field().constant(p - 1);
            crate::residue::solve_frobenius_affine(&minus_one, &e_bar).map_err(|err| {
                if matches!(err, Error::NoSolution) {
                    Error::NoRootInM { pi_level: v }
                } else {
                    err
                }
            })?
        } else {
            e_bar.neg()
        };
        let z = tower
            .from_residue(&g_bar)?
            .mul(&tower.pi().pow_u64(t as u64)?)?;
        y = one.add(&y)?.mul(&one.add(&z)?)?.sub(&one)?;
    }
    Err(Error::ConvergenceStall(
        "isogeny-division iteration budget exhausted".into(),
    ))
}

/// Residue of `e·Π^{−v}` for a defect with exact leading Π-level `v`
/// (grid row `v mod (p−1)` at `p`-power `v div (p−1)`, with the sign of
/// `w^{−a}` folded in).
fn leading_residue_of(e: &TowerElement, v: i64) -> Result<crate::residue::ResidueElement> {
    let e = e.materialized()?;
    let t = e.tower().clone();
    let p = t.prime();
    let r = (v % (p as i64 - 1)) as usize;
    let a = (v / (p as i64 - 1)) as u32;
    let pa = crate::arith::checked_prime_power(p, a).ok_or(Error::PrecisionTooHigh {
        prime: p,
        precision: a,
    })?;
    let mut coeffs = Vec::with_capacity(t.residue_degree());
    for j in 0..t.residue_degree() {
        coeffs.push((e.grid()[r][j] / pa) % p);
    }
    let res = t.residue_field().element(&coeffs)?;
    Ok(if a % 2 == 1 { res.neg() } else { res })
}

/// Finds `j ∈ [0, p)` with `u = η^j` at precision.
fn torsion_exponent(tower: &Tower, u: &TowerElement) -> Result<u64> {
    let one = tower.one();
    let eta = tower.eta();
    let mut pow = one.clone();
    for j in 0..tower.prime() {
        if u.same_value(&pow)? {
            return Ok(j);
        }
        pow = pow.mul(&eta)?;
    }
    Err(Error::NotTorsion)
}

/// The defining oracle: `γ` with `(1+σy)/(1+y) = η^γ` for `[p]y = x`.
pub fn gamma_direct_value(tower: &Tower, x: &TowerElement) -> Result<u64> {
    let y = divide_isogeny(tower, x)?;
    let one = tower.one();
    let u = one.add(&y.sigma(1))?.mul(&one.add(&y)?.inv()?)?;
    torsion_exponent(tower, &u)
}

/// `Tr_{L/K}(Π^{−1}·η·λx)` as a scalar.
fn eta_twisted_trace(tower: &Tower, lam: &TowerElement) -> Result<crate::padic::PAdicScalar> {
    lam.mul(&tower.eta())?.mul_pi_pow(-1).trace_l_to_base()
}

/// The closed trace formula: `γ = (1/p)·Tr_{L/K}(Π^{−1}ηλx) mod p`.
pub fn gamma_artin_hasse_value(tower: &Tower, x: &TowerElement) -> Result<u64> {
    require_symbol_hypothesis(tower, x)?;
    let tr = eta_twisted_trace(tower, &f_log(x)?)?;
    Ok(tr.div_exact_p(1)?.reduce_precision(1)?.value())
}

/// The trace-equation route: `γ = Tr(Π^{−1}ηλx) / Tr(Π^{−1}ηλΩ) mod p`,
/// requiring the denominator's `p`-valuation to be exactly 1.
pub fn gamma_trace_equation_value(gens: &GeneratorSystem, x: &TowerElement) -> Result<u64> {
    let tower = gens.tower();
    require_symbol_hypothesis(tower, x)?;
    let num = eta_twisted_trace(tower, &f_log(x)?)?;
    let den = eta_twisted_trace(tower, gens.lambda_big_omega())?;
    let p = tower.prime();
    let dv = crate::arith::val_p_u64(den.value(), p);
    match dv {
        Some(1) => {}
        Some(v) => return Err(Error::DenominatorDegenerate { valuation: v }),
        None => {
            return Err(Error::DenominatorDegenerate {
                valuation: den.precision(),
            })
        }
    }
    let a = num.div_exact_p(1)?.reduce_precision(1)?.value();
    let b = den.div_exact_p(1)?.reduce_precision(1)?.value();
    let b_inv = inv_mod(b, p).expect("unit by the valuation check");
    Ok(a * b_inv % p)
}

/// The decomposition route: divide the isogeny, decompose the certificate
/// over the generator system, and return `(p/p^m)·Σ c_j mod p`.
pub fn gamma_borevich_value(gens: &GeneratorSystem, x: &TowerElement) -> Result<u64> {
    let y = divide_isogeny(gens.tower(), x)?;
    let dec = decompose(gens, &y)?;
    Ok(gamma_from_decomposition(&dec, gens.tower())?.value())
}

/// A tower plus its constructed generator system at one precision.
#[derive(Debug, Clone)]
pub struct LabContext {
    tower: Tower,
    gens: GeneratorSystem,
}

impl LabContext {
    pub fn new(p: u64, m: u32, precision: u32) -> Result<Self> {
        let tower = Tower::new(p, m, precision)?;
        let gens = GeneratorSystem::construct(&tower)?;
        Ok(LabContext { tower, gens })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }

    pub fn gens(&self) -> &GeneratorSystem {
        &self.gens
    }
}

/// The same input instantiated at the lab's two precisions.
#[derive(Debug, Clone)]
pub struct DualElement {
    lo: TowerElement,
    hi: TowerElement,
}

impl DualElement {
    pub fn low(&self) -> &TowerElement {
        &self.lo
    }

    pub fn high(&self) -> &TowerElement {
        &self.hi
    }
}

/// A forward-generated valid input at both precisions, with the
/// expected exponent known by construction.
#[derive(Debug, Clone)]
pub struct DualSample {
    pub x: DualElement,
    pub y: DualElement,
    pub expected_gamma: u64,
    pub coboundary_class: i64,
}

/// The symbol laboratory: every route is evaluated at the declared
/// precision `N` and re-evaluated at `N+2`; a reported result carries
/// `stable = true` only when the two runs agree.
#[derive(Debug, Clone)]
pub struct SymbolLab {
    lo: LabContext,
    hi: LabContext,
}

impl SymbolLab {
    pub fn new(p: u64, m: u32, precision: u32) -> Result<Self> {
        Ok(SymbolLab {
            lo: LabContext::new(p, m, precision)?,
            hi: LabContext::new(p, m, precision + 2)?,
        })
    }

    pub fn low(&self) -> &LabContext {
        &self.lo
    }

    pub fn high(&self) -> &LabContext {
        &self.hi
    }

    pub fn prime(&self) -> u64 {
        self.lo.tower.prime()
    }

    /// Parses a text-grammar element in both towers.
    pub fn parse_input(&self, text: &str) -> Result<DualElement> {
        Ok(DualElement {
            lo: parse_element(&self.lo.tower, text)?,
            hi: parse_element(&self.hi.tower, text)?,
        })
    }

    /// Wraps two independently built elements (they must denote the same
    /// input; use [`SymbolLab::parse_input`] when a text form exists).
    pub fn input_from_parts(&self, lo: TowerElement, hi: TowerElement) -> DualElement {
        DualElement { lo, hi }
    }

    /// Draws a valid input with identical integer coefficients at both
    /// precisions; the expected `γ` is known by construction.
    pub fn sample_input(&self, seed: u64) -> Result<DualSample> {
        let lo = sample_valid_input(&self.lo.gens, &mut ChaCha12Rng::seed_from_u64(seed))?;
        let hi = sample_valid_input(&self.hi.gens, &mut ChaCha12Rng::seed_from_u64(seed))?;
        debug_assert_eq!(
            lo.gamma, hi.gamma,
            "identical draws must give identical classes"
        );
        let ValidSample {
            y: y_lo,
            x: x_lo,
            coboundary_class,
            gamma,
        } = lo;
        Ok(DualSample {
            x: DualElement { lo: x_lo, hi: hi.x },
            y: DualElement { lo: y_lo, hi: hi.y },
            expected_gamma: gamma,
            coboundary_class,
        })
    }

    fn dual_run(
        &self,
        method: Method,
        x: &DualElement,
        f: impl Fn(&LabContext, &TowerElement) -> Result<u64>,
    ) -> Result<SymbolResult> {
        let gamma = f(&self.lo, &x.lo)?;
        let stable = match f(&self.hi, &x.hi) {
            Ok(g) => g == gamma,
            Err(_) => false,
        };
        Ok(SymbolResult {
            gamma,
            method,
            precision_used: self.lo.tower.declared_precision(),
            stable,
        })
    }

    pub fn gamma_direct(&self, x: &DualElement) -> Result<SymbolResult> {
        self.dual_run(Method::Direct, x, |ctx, x| {
            gamma_direct_value(&ctx.tower, x)
        })
    }

    pub fn gamma_artin_hasse(&self, x: &DualElement) -> Result<SymbolResult> {
        self.dual_run(Method::ArtinHasse, x, |ctx, x| {
            gamma_artin_hasse_value(&ctx.tower, x)
        })
    }

    pub fn gamma_trace_equation(&self, x: &DualElement) -> Result<SymbolResult> {
        self.dual_run(Method::TraceEquation, x, |ctx, x| {
            gamma_trace_equation_value(&ctx.gens, x)
        })
    }

    pub fn gamma_borevich(&self, x: &DualElement) -> Result<SymbolResult> {
        self.dual_run(Method::Borevich, x, |ctx, x| {
            gamma_borevich_value(&ctx.gens, x)
        })
    }

    /// `γ(t, x) = ν_Π(t)·γ(Π, x) mod p`: the Frobenius power attached to
    /// `t` is its valuation, and `ζ` is fixed by it. Units pair to 0.
    /// The multiplier contributed by the first pairing argument: the
    /// symbol is linear in the Π-valuation of `t`, so `(t, x)` equals
    /// `ν(t)·(Π, x)` and this returns `ν(t) mod p`.  Rejects a zero `t`
    /// and a `t` whose valuation is positive but not exactly known.
    pub fn first_argument_exponent(&self, t: &DualElement) -> Result<u64> {
        if t.lo.is_zero() {
            return Err(Error::InvalidArgument(
                "the first pairing argument must be nonzero".into(),
            ));
        }
        let pv = t.lo.pi_val();
        if !pv.is_exact() && pv.lower_bound() > 0 {
            return Err(Error::PrecisionTooLow {
                required: self.lo.tower.declared_precision() + 2,
                actual: self.lo.tower.declared_precision(),
            });
        }
        Ok(pv.lower_bound().rem_euclid(self.prime() as i64) as u64)
    }

    pub fn gamma_general(&self, t: &DualElement, x: &DualElement) -> Result<SymbolResult> {
        let k = self.first_argument_exponent(t)?;
        let p = self.prime();
        let base = self.gamma_direct(x)?;
        Ok(SymbolResult {
            gamma: k * base.gamma % p,
            ..base
        })
    }

    /// Runs all four routes and classifies the outcome.
    pub fn compare_all(&self, x: &DualElement) -> CompareReport {
        let routes = vec![
            RouteReport::capture(Method::Direct, self.gamma_direct(x)),
            RouteReport::capture(Method::ArtinHasse, self.gamma_artin_hasse(x)),
            RouteReport::capture(Method::TraceEquation, self.gamma_trace_equation(x)),
            RouteReport::capture(Method::Borevich, self.gamma_borevich(x)),
        ];
        let verdict = Verdict::classify(&routes);
        CompareReport {
            prime: self.prime(),
            height: self.lo.tower.height(),
            precision: self.lo.tower.declared_precision(),
            routes,
            verdict,
        }
    }
}

/// How a route refused an input (as opposed to failing internally).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RejectionKind {
    /// No division root in the unramified tower (direct route).
    NoRoot,
    /// The validity hypothesis failed (trace routes).
    HypothesisViolated,
    /// Outside the pairing's domain altogether.
    Domain,
}

/// Outcome of one route inside a comparison.
#[derive(Debug, Clone)]
pub struct RouteReport {
    pub method: Method,
    pub outcome: std::result::Result<SymbolResult, String>,
    rejection: Option<RejectionKind>,
}

impl RouteReport {
    fn capture(method: Method, r: Result<SymbolResult>) -> Self {
        match r {
            Ok(res) => RouteReport {
                method,
                outcome: Ok(res),
                rejection: None,
            },
            Err(e) => {
                let rejection = match e {
                    Error::NoRootInM { .. } => Some(RejectionKind::NoRoot),
                    Error::NotDivisible { .. } => Some(RejectionKind::HypothesisViolated),
                    Error::NotInMaximalIdeal | Error::NotInBaseField => Some(RejectionKind::Domain),
                    _ => None,
                };
                RouteReport {
                    method,
                    outcome: Err(e.to_string()),
                    rejection,
                }
            }
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match &self.outcome {
            Ok(res) => {
                let mut v = res.to_json();
                v["method"] = json!(self.method.as_str());
                v
            }
            Err(msg) => json!({
                "method": self.method.as_str(),
                "error": msg,
                "rejection": self.rejection.is_some(),
            }),
        }
    }
}

/// Agreement classification across the four routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// All four routes computed the same stable `γ`.
    Agree { gamma: u64 },
    /// All four routes rejected the input, with the direct route
    /// reporting no unramified root and the trace formula reporting the
    /// hypothesis violation.
    RejectedConsistently,
    /// Anything else — an internal inconsistency.
    Disagree,
}

impl Verdict {
    fn classify(routes: &[RouteReport]) -> Verdict {
        let all_ok: Vec<&SymbolResult> = routes
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok())
            .collect();
        if all_ok.len() == routes.len() {
            let gamma = all_ok[0].gamma;
            if all_ok.iter().all(|r| r.gamma == gamma && r.stable) {
                return Verdict::Agree { gamma };
            }
            return Verdict::Disagree;
        }
        if all_ok.is_empty() && routes.iter().all(|r| r.rejection.is_some()) {
            let kind_of = |m: Method| {
                routes
                    .iter()
                    .find(|r| r.method == m)
                    .and_then(|r| r.rejection)
            };
            let direct = kind_of(Method::Direct);
            let ah = kind_of(Method::ArtinHasse);
            let hypothesis_pattern = direct == Some(RejectionKind::NoRoot)
                && ah == Some(RejectionKind::HypothesisViolated);
            let domain_pattern =
                direct == Some(RejectionKind::Domain) && ah == Some(RejectionKind::Domain);
            if hypothesis_pattern || domain_pattern {
                return Verdict::RejectedConsistently;
            }
        }
        Verdict::Disagree
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Agree { .. } => "agree",
            Verdict::RejectedConsistently => "rejected_consistently",
            Verdict::Disagree => "disagree",
        }
    }

    /// CLI exit code: 0 agreement, 2 consistent rejection, 1 internal
    /// disagreement.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Agree { .. } => 0,
            Verdict::RejectedConsistently => 2,
            Verdict::Disagree => 1,
        }
    }
}

/// Cross-route comparison report.
#[derive(Debug, Clone)]
pub struct CompareReport {
    pub prime: u64,
    pub height: u32,
    pub precision: u32,
    pub routes: Vec<RouteReport>,
    pub verdict: Verdict,
}

impl CompareReport {
    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = json!({
            "p": self.prime,
            "m": self.height,
            "precision": self.precision,
            "routes": self.routes.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "verdict": self.verdict.as_str(),
        });
        if let Verdict::Agree { gamma } = self.verdict {
            obj["gamma"] = json!(gamma);
        }
        obj
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "symbol comparison (p={}, m={}, N={})\n",
            self.prime, self.height, self.precision
        ));
        for r in &self.routes {
            match &r.outcome {
                Ok(res) => out.push_str(&format!(
                    "  {:<16} gamma={}  stable={}\n",
                    r.method.as_str(),
                    res.gamma,
                    res.stable
                )),
                Err(msg) => out.push_str(&format!(
                    "  {:<16} {}: {}\n",
                    r.method.as_str(),
                    if r.rejection.is_some() {
                        "rejected"
                    } else {
                        "error"
                    },
                    msg
                )),
            }
        }
        out.push_str(&format!("verdict: {}\n", self.verdict.as_str()));
        out
    }
}
