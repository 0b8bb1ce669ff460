//! Axioms (M1)–(M5) for a triple `(M, F, λ)`, the point-count report and
//! the small-degree / hyperbolic / rank classification of `NS`.
//!
//! Every axiom is evaluated even when an earlier one fails; dependent
//! checks report [`Verdict::Precondition`] instead of short-circuiting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::algebra::{minimal_poly, IntMatrix, IntPoly, RatVector};
use crate::ample_cone::{
    apply_frobenius, frobenius_preserves_chamber, ns_coordinates, same_chamber, slice_vectors, validate_chamber,
    ChamberCheck, ConeError, Invariance,
};
use crate::format::{self, matrix_strings, strings, FormatError, TripleDocument};
use crate::lattice::{Lattice, Signature};
use crate::neron_severi::{hodge_index_check, neron_severi, transcendental, Cyclicity, NSLattice, NsError};
use crate::padic::{
    integral_splitting, newton_polygon, slope_strings, unit_root_pairing_check, PadicError, PadicPrecision,
    SplitCertificate, SplitOptions,
};
use crate::weil::{
    frobenius_det_check, is_semisimple, is_weil_q2, point_count, scaling_defect, FrobeniusData, WeilError, WeilParams,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifyError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
}

impl From<FormatError> for VerifyError {
    fn from(e: FormatError) -> Self {
        VerifyError::MalformedInput(e.to_string())
    }
}

/// A triple `(M, F, λ)` with its Weil parameters.
#[derive(Debug, Clone)]
pub struct TripleInput {
    pub params: WeilParams,
    pub lattice: Lattice,
    pub frobenius: IntMatrix,
    pub ample_point: RatVector,
    /// Whether (M1) is checked against the K3 profile.
    pub claims_k3: bool,
}

impl TripleInput {
    pub fn new(
        params: WeilParams,
        lattice: Lattice,
        frobenius: IntMatrix,
        ample_point: RatVector,
        claims_k3: bool,
    ) -> Result<Self, VerifyError> {
        let n = lattice.rank();
        if frobenius.rows() != n || frobenius.cols() != n {
            return Err(VerifyError::MalformedInput(format!("frobenius must be {n}x{n}")));
        }
        if ample_point.len() != n {
            return Err(VerifyError::MalformedInput(format!(
                "ample_point must have {n} entries"
            )));
        }
        Ok(TripleInput {
            params,
            lattice,
            frobenius,
            ample_point,
            claims_k3,
        })
    }

    pub fn from_document(doc: &TripleDocument) -> Result<Self, VerifyError> {
        let params =
            WeilParams::with_q(doc.p, doc.a, &doc.q).map_err(|e| VerifyError::MalformedInput(e.to_string()))?;
        Self::new(
            params,
            doc.lattice(),
            doc.frobenius.clone(),
            doc.ample_point(),
            doc.claims_k3,
        )
    }

    pub fn parse(text: &str) -> Result<Self, VerifyError> {
        Self::from_document(&TripleDocument::parse(text)?)
    }

    pub fn to_document(&self) -> TripleDocument {
        TripleDocument {
            p: self.params.p(),
            a: self.params.a(),
            q: self.params.q().clone(),
            claims_k3: self.claims_k3,
            gram: self.lattice.gram().clone(),
            frobenius: self.frobenius.clone(),
            ample_point: self.ample_point.numerators().to_vec(),
            ample_point_denominator: self.ample_point.denominator().clone(),
        }
    }

    pub fn frobenius_data(&self) -> FrobeniusData {
        FrobeniusData::new(self.lattice.clone(), self.frobenius.clone(), self.params.clone())
            .expect("dimensions checked on construction")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Initial p-adic precision exponent; `None` uses `a·(rank + 4)`.
    pub precision: Option<u32>,
    pub cap_factor: u32,
    /// Point counts `N_1..N_k` in the zeta report.
    pub zeta_max_n: u32,
    /// Height bound for the classification searches.
    pub classification_bound: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            precision: None,
            cap_factor: 16,
            zeta_max_n: 3,
            classification_bound: 3,
        }
    }
}

/// Concrete evidence attached to a failing axiom.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Profile {
        even: bool,
        unimodular: bool,
        signature: Option<String>,
        rank: usize,
    },
    Entry {
        row: usize,
        col: usize,
        lhs: String,
        rhs: String,
    },
    Polynomial {
        coefficients: Vec<String>,
        reason: String,
    },
    Slopes {
        slopes: Vec<(String, usize)>,
    },
    Divisibility {
        level: usize,
        row: usize,
        col: usize,
        entry: String,
    },
    Signature {
        signature: String,
    },
    Root {
        root: Vec<String>,
    },
    Vector {
        vector: Vec<String>,
        denominator: String,
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { detail: String, witness: Witness },
    Precondition { detail: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn fail(detail: impl Into<String>, witness: Witness) -> Self {
        Verdict::Fail {
            detail: detail.into(),
            witness,
        }
    }

    fn precondition(detail: impl Into<String>) -> Self {
        Verdict::Precondition { detail: detail.into() }
    }

    fn label(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail { .. } => "FAIL",
            Verdict::Precondition { .. } => "precondition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct K3Profile {
    pub even: bool,
    pub unimodular: bool,
    pub signature: Option<String>,
    pub rank: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonReport {
    /// `(valuation, multiplicity)`, valuations as reduced fractions.
    pub slopes: Vec<(String, usize)>,
    pub ordinary_shape: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateReport {
    pub p: u64,
    pub working_precision: u32,
    pub certified_precision: u32,
    pub ranks: [usize; 3],
    /// Row bases of `M⁰, M¹, M²` modulo `p^certified_precision`.
    pub bases: [Vec<Vec<String>>; 3],
    pub stacked_det_mod_p: u64,
    pub block_det_mod_p: [u64; 3],
}

impl CertificateReport {
    fn new(c: &SplitCertificate) -> Self {
        let (r0, r1, r2) = c.ranks();
        CertificateReport {
            p: c.p,
            working_precision: c.working_precision,
            certified_precision: c.certified_precision,
            ranks: [r0, r1, r2],
            bases: [
                matrix_strings(&c.bases[0]),
                matrix_strings(&c.bases[1]),
                matrix_strings(&c.bases[2]),
            ],
            stacked_det_mod_p: c.stacked_det_mod_p,
            block_det_mod_p: c.block_det_mod_p,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SplitReport {
    Certified { certificate: CertificateReport },
    Failed { detail: String },
    Skipped { detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DetReport {
    pub det: String,
    pub equals_plus_minus_q_rank: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NsReport {
    pub rho: usize,
    pub basis: Vec<Vec<String>>,
    pub gram: Vec<Vec<String>>,
    pub signature: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TranscendentalReport {
    pub rank: usize,
    pub minimal_poly: Vec<String>,
    pub cyclic: Cyclicity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    /// `F` on `M⁰` modulo `p`, from the certificate.
    pub unit_root_mod_p: u64,
    pub trace_mod_p: u64,
    pub n1_mod_p: u64,
    /// `tr F ≡ unit root` and `N₁ ≢ 1 (mod p)`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZetaReport {
    pub trace: String,
    /// `N_n = 1 + tr(Fⁿ) + q^{2n}` for `n = 1..k`.
    pub point_counts: Vec<String>,
    /// `N₁ < 0`.
    pub question: bool,
    /// `N₁ = 0`, reported separately from the strict inequality.
    pub boundary: bool,
    pub congruence: Option<CongruenceReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowDegreeClass {
    SmallDegree,
    HyperbolicPlane,
    Rank12,
    None,
    UnknownUpToBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Classification {
    pub class: LowDegreeClass,
    pub bound: u64,
    /// Ambient coordinates: the small-norm vector, or the pair `e, f`.
    pub witness: Vec<Vec<String>>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AxiomVerdicts {
    pub m1: Verdict,
    pub m2: Verdict,
    pub m3: Verdict,
    pub m4: Verdict,
    pub m5: Verdict,
}

impl AxiomVerdicts {
    pub fn all(&self) -> [(&'static str, &Verdict); 5] {
        [
            ("M1", &self.m1),
            ("M2", &self.m2),
            ("M3", &self.m3),
            ("M4", &self.m4),
            ("M5", &self.m5),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub format_version: u64,
    pub input_digest: String,
    pub mode: &'static str,
    pub p: u64,
    pub a: u32,
    pub q: String,
    pub rank: usize,
    pub axioms: AxiomVerdicts,
    pub k3_profile: K3Profile,
    pub charpoly: Vec<String>,
    pub newton_polygon: Option<NewtonReport>,
    pub split: SplitReport,
    pub det_check: DetReport,
    pub ns: NsReport,
    pub transcendental: Option<TranscendentalReport>,
    pub zeta: ZetaReport,
    pub classification: Option<Classification>,
    pub all_pass: bool,
}

impl VerificationReport {
    /// Machine-readable form; byte-identical for identical inputs.
    pub fn to_json(&self) -> String {
        format::to_pretty(&serde_json::to_value(self).expect("report serializes"))
    }

    /// Short human-readable summary.
    pub fn summary(&self) -> String {
        let mut s = format!(
            "mode {} | p = {}, a = {}, q = {}, rank {}\n",
            self.mode, self.p, self.a, self.q, self.rank
        );
        for (name, v) in self.axioms.all() {
            s.push_str(&format!("{name}: {}", v.label()));
            match v {
                Verdict::Fail { detail, .. } | Verdict::Precondition { detail } => s.push_str(&format!(" ({detail})")),
                Verdict::Pass => {}
            }
            s.push('\n');
        }
        if let Some(np) = &self.newton_polygon {
            s.push_str(&format!("Newton slopes: {}\n", slopes_text(&np.slopes)));
        }
        s.push_str(&format!("NS rank: {}\n", self.ns.rho));
        s.push_str(&format!(
            "N_1 = {}{}\n",
            self.zeta.point_counts.first().map(String::as_str).unwrap_or("?"),
            if self.zeta.question { " (< 0)" } else { "" }
        ));
        if let Some(c) = &self.classification {
            s.push_str(&format!("classification: {:?}\n", c.class));
        }
        s.push_str(if self.all_pass {
            "all axioms pass\n"
        } else {
            "some axioms fail\n"
        });
        s
    }
}

pub fn slopes_text(slopes: &[(String, usize)]) -> String {
    let parts: Vec<String> = slopes.iter().map(|(v, m)| format!("{v}: {m}")).collect();
    format!("{{{}}}", parts.join(", "))
}

fn poly_strings(p: &IntPoly) -> Vec<String> {
    strings(p.coeffs())
}

fn k3_profile(l: &Lattice) -> K3Profile {
    let sig = l.signature().ok();
    let even = l.is_even();
    let unimodular = l.is_unimodular();
    K3Profile {
        even,
        unimodular,
        signature: sig.map(|s| s.to_string()),
        rank: l.rank(),
        matches: even && unimodular && l.rank() == 22 && sig == Some(Signature::new(3, 19)),
    }
}

fn check_m1(t: &TripleInput, profile: &K3Profile) -> Verdict {
    let witness = Witness::Profile {
        even: profile.even,
        unimodular: profile.unimodular,
        signature: profile.signature.clone(),
        rank: profile.rank,
    };
    if t.claims_k3 {
        if profile.matches {
            Verdict::Pass
        } else {
            Verdict::fail("not even unimodular of rank 22 and signature (3, 19)", witness)
        }
    } else if profile.even && profile.signature.is_some() {
        Verdict::Pass
    } else {
        Verdict::fail("not even and nondegenerate", witness)
    }
}

fn check_m2(fd: &FrobeniusData) -> Verdict {
    match scaling_defect(fd) {
        None => Verdict::Pass,
        Some((i, j, lhs, rhs)) => Verdict::fail(
            format!("<Fe_{i}, Fe_{j}> != q^2 <e_{i}, e_{j}>"),
            Witness::Entry {
                row: i,
                col: j,
                lhs: lhs.to_string(),
                rhs: rhs.to_string(),
            },
        ),
    }
}

fn check_m3(fd: &FrobeniusData, chi: &IntPoly) -> Verdict {
    let weil = match is_weil_q2(chi, fd.q()) {
        Ok(w) => w,
        Err(WeilError::OddResidualDegree(_)) | Err(WeilError::NoSuchTransform) => false,
        Err(e) => {
            return Verdict::fail(
                e.to_string(),
                Witness::Polynomial {
                    coefficients: poly_strings(chi),
                    reason: "characteristic polynomial".into(),
                },
            )
        }
    };
    if !weil {
        return Verdict::fail(
            "characteristic polynomial is not a q^2-Weil polynomial",
            Witness::Polynomial {
                coefficients: poly_strings(chi),
                reason: "characteristic polynomial".into(),
            },
        );
    }
    if !is_semisimple(fd.frobenius()) {
        let m = minimal_poly(fd.frobenius()).expect("square");
        return Verdict::fail(
            "F is not semisimple",
            Witness::Polynomial {
                coefficients: poly_strings(&m),
                reason: "minimal polynomial is not squarefree".into(),
            },
        );
    }
    Verdict::Pass
}

fn split_shape(n: usize) -> Option<(usize, usize, usize)> {
    (n >= 2).then(|| (1, n - 2, 1))
}

fn check_m4(
    fd: &FrobeniusData,
    chi: &IntPoly,
    newton: &Option<NewtonReport>,
    opts: &VerifyOptions,
) -> (Verdict, SplitReport, Option<SplitCertificate>) {
    let Some(np) = newton else {
        let w = Witness::Polynomial {
            coefficients: poly_strings(chi),
            reason: "constant term is zero".into(),
        };
        return (
            Verdict::fail("F is not invertible", w),
            SplitReport::Skipped {
                detail: "Newton polygon undefined".into(),
            },
            None,
        );
    };
    let Some(shape) = split_shape(fd.rank()) else {
        return (
            Verdict::fail(
                "rank below 2",
                Witness::Slopes {
                    slopes: np.slopes.clone(),
                },
            ),
            SplitReport::Skipped {
                detail: "rank below 2".into(),
            },
            None,
        );
    };
    if !np.ordinary_shape {
        let detail = format!(
            "slopes {} are not {{0: 1, {}: {}, {}: 1}}",
            slopes_text(&np.slopes),
            fd.params().a(),
            shape.1,
            2 * fd.params().a()
        );
        return (
            Verdict::fail(
                detail.clone(),
                Witness::Slopes {
                    slopes: np.slopes.clone(),
                },
            ),
            SplitReport::Skipped { detail },
            None,
        );
    }
    let split_opts = SplitOptions {
        initial_precision: opts.precision,
        cap_factor: opts.cap_factor,
    };
    let cert = match integral_splitting(fd, shape, split_opts) {
        Ok(c) => c,
        Err(PadicError::NotSplittable(d)) => {
            let detail = d.to_string();
            let w = Witness::Divisibility {
                level: d.level,
                row: d.row,
                col: d.col,
                entry: d.entry.to_string(),
            };
            return (Verdict::fail(detail.clone(), w), SplitReport::Failed { detail }, None);
        }
        Err(e) => {
            let detail = e.to_string();
            return (
                Verdict::precondition(format!("splitting not certified: {detail}")),
                SplitReport::Failed { detail },
                None,
            );
        }
    };
    let report = SplitReport::Certified {
        certificate: CertificateReport::new(&cert),
    };
    let prec = PadicPrecision::new(cert.p, cert.working_precision);
    let verdict = match unit_root_pairing_check(fd, prec) {
        Ok(true) => Verdict::Pass,
        Ok(false) => Verdict::fail(
            "q^2 divided by the unit root is not a root of the characteristic polynomial",
            Witness::Polynomial {
                coefficients: poly_strings(chi),
                reason: "unit-root pairing".into(),
            },
        ),
        Err(e) => Verdict::precondition(format!("unit-root pairing: {e}")),
    };
    (verdict, report, Some(cert))
}

fn vector_witness(v: &RatVector, reason: &str) -> Witness {
    Witness::Vector {
        vector: strings(v.numerators()),
        denominator: v.denominator().to_string(),
        reason: reason.into(),
    }
}

fn cone_precondition(e: ConeError) -> Verdict {
    Verdict::precondition(format!("chamber computation: {e}"))
}

fn check_m5(fd: &FrobeniusData, ns: &NSLattice, lambda: &RatVector, m2: &Verdict) -> Verdict {
    if !m2.is_pass() {
        return Verdict::precondition("requires (M2)");
    }
    if ns.rho() == 0 {
        // No chamber structure: only the empty point is admissible.
        return if lambda.is_zero() {
            Verdict::Pass
        } else {
            Verdict::fail(
                "NS is zero but the ample point is nonzero",
                vector_witness(lambda, "ample point"),
            )
        };
    }
    match hodge_index_check(ns) {
        Err(NsError::DegenerateRestriction) => return Verdict::precondition("restricted form on NS is degenerate"),
        Err(e) => return Verdict::precondition(e.to_string()),
        Ok(false) => {
            let sig = ns.signature().map(|s| s.to_string()).unwrap_or_default();
            return Verdict::fail(
                format!("NS has signature {sig}, not (1, rho - 1)"),
                Witness::Signature { signature: sig },
            );
        }
        Ok(true) => {}
    }
    match validate_chamber(ns, lambda) {
        Err(e) => return cone_precondition(e),
        Ok(ChamberCheck::NotInNs) => {
            return Verdict::fail("ample point is not in NS ⊗ Q", vector_witness(lambda, "ample point"))
        }
        Ok(ChamberCheck::NonPositive) => {
            return Verdict::fail(
                "ample point has non-positive norm",
                vector_witness(lambda, "ample point"),
            )
        }
        Ok(ChamberCheck::OnWall(d)) => {
            return Verdict::fail("ample point lies on a root wall", Witness::Root { root: strings(&d) })
        }
        Ok(ChamberCheck::Valid) => {}
    }
    match frobenius_preserves_chamber(fd, ns, lambda) {
        Err(e) => cone_precondition(e),
        Ok(Invariance::Preserved) => Verdict::Pass,
        Ok(Invariance::OppositeCone) => Verdict::fail(
            "F maps the ample point to the opposite cone",
            vector_witness(&apply_frobenius(fd, lambda), "image of the ample point"),
        ),
        Ok(Invariance::ImageOnWall(d)) => Verdict::fail(
            "image of the ample point lies on a root wall",
            Witness::Root { root: strings(&d) },
        ),
        Ok(Invariance::Separated(d)) => Verdict::fail(
            "a root separates the ample point from its image",
            Witness::Root { root: strings(&d) },
        ),
    }
}

fn mod_p_u64(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p)).to_u64().expect("reduced below p")
}

/// Point counts `N_1..N_k`, the question flag, and the congruence check when
/// a splitting certificate is available.
pub fn zeta_report(fd: &FrobeniusData, k: u32, cert: Option<&SplitCertificate>) -> ZetaReport {
    let counts: Vec<BigInt> = (1..=k.max(1)).map(|n| point_count(fd, n)).collect();
    let n1 = counts[0].clone();
    let trace = fd.frobenius().trace();
    let p = fd.params().p();
    let congruence = cert.map(|c| {
        let unit = c.block_det_mod_p[0];
        let tr = mod_p_u64(&trace, p);
        let n1p = mod_p_u64(&n1, p);
        CongruenceReport {
            unit_root_mod_p: unit,
            trace_mod_p: tr,
            n1_mod_p: n1p,
            holds: tr == unit && n1p != 1 % p,
        }
    });
    ZetaReport {
        trace: trace.to_string(),
        point_counts: strings(&counts[..k as usize]),
        question: n1.is_negative(),
        boundary: n1.is_zero(),
        congruence,
    }
}

fn ambient(ns: &NSLattice, z: &[BigInt]) -> Vec<String> {
    strings(&ns.basis().vec_mul(z))
}

/// `f` with `⟨e, f⟩ = 1` when the entries of `G e` are coprime.
fn partner(gram: &IntMatrix, e: &[BigInt]) -> Option<Vec<BigInt>> {
    let ge = gram.mul_vec(e);
    let mut g = BigInt::zero();
    let mut coeffs: Vec<BigInt> = Vec::with_capacity(ge.len());
    for x in &ge {
        let eg = g.extended_gcd(x);
        for c in coeffs.iter_mut() {
            *c *= &eg.x;
        }
        coeffs.push(eg.y);
        g = eg.gcd;
    }
    if g.is_negative() {
        g = -g;
        coeffs.iter_mut().for_each(|c| *c = -&*c);
    }
    g.is_one().then_some(coeffs)
}

/// Classifies `NS` for a triple whose (M5) passed: rank ≥ 12, a hyperbolic
/// plane `⟨e, f⟩`, or a chamber-side vector of even norm `< p − 4`.
/// Searches are bounded by the height `⟨λ, ·⟩ ≤ bound` in the primitive
/// integral direction of `λ`.
pub fn classify_low_degree(ns: &NSLattice, lambda: &RatVector, p: u64, bound: u64) -> Classification {
    let result = |class, witness, note: &str| Classification {
        class,
        bound,
        witness,
        note: note.into(),
    };
    let rho = ns.rho();
    if rho >= 12 {
        return result(LowDegreeClass::Rank12, Vec::new(), "rank of NS is at least 12");
    }
    let limit = BigInt::from(p) - 4;
    if rho == 0 {
        return result(LowDegreeClass::None, Vec::new(), "NS is zero");
    }
    let Ok(y) = ns_coordinates(ns, lambda) else {
        return result(LowDegreeClass::UnknownUpToBound, Vec::new(), "ample point not in NS");
    };
    let g = ns.gram();
    if rho == 1 {
        let h2 = &g[(0, 0)];
        let sign = if y[0].is_negative() { -1 } else { 1 };
        let gen = vec![BigInt::from(sign)];
        return if h2 < &limit {
            result(LowDegreeClass::SmallDegree, vec![ambient(ns, &gen)], "generator of NS")
        } else {
            result(
                LowDegreeClass::None,
                Vec::new(),
                "rank 1: every class has norm at least that of the generator, and no isotropic vectors",
            )
        };
    }
    let w = g.mul_vec(&y);
    for s in 1..=bound {
        let Ok(iso) = slice_vectors(g, &w, &BigInt::from(s), &BigInt::zero()) else {
            break;
        };
        for e in iso {
            let content = e.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
            if !content.is_one() {
                continue;
            }
            if let Some(f) = partner(g, &e) {
                return result(
                    LowDegreeClass::HyperbolicPlane,
                    vec![ambient(ns, &e), ambient(ns, &f)],
                    "isotropic e and f with <e, f> = 1",
                );
            }
        }
    }
    let mut norm = BigInt::from(2);
    while norm < limit {
        for s in 1..=bound {
            let Ok(cands) = slice_vectors(g, &w, &BigInt::from(s), &norm) else {
                break;
            };
            for z in cands {
                let amb = ns.basis().vec_mul(&z);
                let mu = RatVector::from_integers(amb.clone());
                if same_chamber(ns, lambda, &mu).unwrap_or(false) {
                    return result(
                        LowDegreeClass::SmallDegree,
                        vec![strings(&amb)],
                        "vector in the chamber of the ample point",
                    );
                }
            }
        }
        norm += 2;
    }
    result(
        LowDegreeClass::UnknownUpToBound,
        Vec::new(),
        "no witness up to the height bound",
    )
}

/// Runs (M1)–(M5) and assembles the full report.
pub fn verify_triple(t: &TripleInput, opts: &VerifyOptions) -> VerificationReport {
    let fd = t.frobenius_data();
    let chi = fd.charpoly();
    let profile = k3_profile(&t.lattice);
    let m1 = check_m1(t, &profile);
    let m2 = check_m2(&fd);
    let m3 = check_m3(&fd, &chi);
    let a = fd.params().a();
    let newton = newton_polygon(&chi, fd.params().p()).ok().map(|np| NewtonReport {
        slopes: slope_strings(&np),
        ordinary_shape: split_shape(fd.rank()).is_some_and(|s| np.matches_shape(a, s))
            && np.multiplicity(Rational64::zero()) == 1,
    });
    let (m4, split, cert) = check_m4(&fd, &chi, &newton, opts);
    let ns = neron_severi(&fd);
    let m5 = check_m5(&fd, &ns, &t.ample_point, &m2);
    let det = frobenius_det_check(&fd);
    let trans = (m2.is_pass() && ns.rho() < fd.rank()).then(|| {
        let tr = transcendental(&fd, &ns);
        TranscendentalReport {
            rank: tr.sublattice.rank(),
            minimal_poly: poly_strings(&tr.minimal_poly),
            cyclic: tr.cyclic,
        }
    });
    let zeta = zeta_report(&fd, opts.zeta_max_n, cert.as_ref());
    let classification = m5
        .is_pass()
        .then(|| classify_low_degree(&ns, &t.ample_point, fd.params().p(), opts.classification_bound));
    let axioms = AxiomVerdicts { m1, m2, m3, m4, m5 };
    let all_pass = axioms.all().iter().all(|(_, v)| v.is_pass());
    VerificationReport {
        format_version: format::FORMAT_VERSION,
        input_digest: t.to_document().digest(),
        mode: if t.claims_k3 { "k3" } else { "generalized" },
        p: fd.params().p(),
        a,
        q: fd.q().to_string(),
        rank: fd.rank(),
        axioms,
        k3_profile: profile,
        charpoly: poly_strings(&chi),
        newton_polygon: newton,
        split,
        det_check: DetReport {
            det: det.det.to_string(),
            equals_plus_minus_q_rank: det.holds,
        },
        ns: NsReport {
            rho: ns.rho(),
            basis: matrix_strings(ns.basis()),
            gram: matrix_strings(ns.gram()),
            signature: ns.signature().ok().map(|s| s.to_string()),
        },
        transcendental: trans,
        zeta,
        classification,
        all_pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    /// `⟨2⟩ ⊕ A2` with `F = 7 ⊕ [[8, -3], [3, 5]]` at `p = q = 7`.
    fn small_pass() -> TripleInput {
        let gram = IntMatrix::from_i64(&[&[2, 0, 0], &[0, 2, -1], &[0, -1, 2]]);
        let f = IntMatrix::from_i64(&[&[7, 0, 0], &[0, 8, -3], &[0, 3, 5]]);
        TripleInput::new(
            WeilParams::new(7, 1).unwrap(),
            Lattice::new(gram).unwrap(),
            f,
            RatVector::from_i64(&[1, 0, 0]),
            false,
        )
        .unwrap()
    }

    #[test]
    fn small_triple_passes() {
        let t = small_pass();
        let r = verify_triple(&t, &VerifyOptions::default());
        assert!(r.all_pass, "{}", r.to_json());
        assert_eq!(r.ns.rho, 1);
        assert_eq!(r.zeta.point_counts[0], "70");
        let c = r.zeta.congruence.as_ref().unwrap();
        assert!(c.holds);
        assert_eq!(r.classification.as_ref().unwrap().class, LowDegreeClass::SmallDegree);
        assert_eq!(r.to_json(), verify_triple(&t, &VerifyOptions::default()).to_json());
    }

    #[test]
    fn k3_scalar_fails_m4() {
        let q = b(3);
        let t = TripleInput::new(
            WeilParams::new(3, 1).unwrap(),
            Lattice::k3(),
            IntMatrix::scalar(22, &q),
            RatVector::from_i64(&[1; 22]),
            true,
        )
        .unwrap();
        let r = verify_triple(&t, &VerifyOptions::default());
        assert!(r.axioms.m1.is_pass());
        assert!(r.axioms.m2.is_pass());
        assert!(r.axioms.m3.is_pass());
        match &r.axioms.m4 {
            Verdict::Fail {
                witness: Witness::Slopes { slopes },
                ..
            } => assert_eq!(slopes, &vec![("1".to_string(), 22)]),
            other => panic!("{other:?}"),
        }
        assert_eq!(r.zeta.point_counts[0], (1 + 22 * 3 + 9).to_string());
        assert!(r.zeta.congruence.is_none());
    }

    #[test]
    fn jordan_block_divisibility() {
        let q = 5;
        let t = TripleInput::new(
            WeilParams::new(5, 1).unwrap(),
            Lattice::hyperbolic_plane().direct_sum(&Lattice::hyperbolic_plane()),
            IntMatrix::from_i64(&[&[1, 0, 0, 0], &[0, q * q, 0, 0], &[0, 0, q, 1], &[0, 0, 0, q]]),
            RatVector::from_i64(&[0, 0, 0, 0]),
            false,
        )
        .unwrap();
        let r = verify_triple(&t, &VerifyOptions::default());
        assert!(matches!(
            r.axioms.m4,
            Verdict::Fail {
                witness: Witness::Divisibility { .. },
                ..
            }
        ));
        assert!(!r.axioms.m2.is_pass());
        assert!(matches!(r.axioms.m5, Verdict::Precondition { .. }));
    }

    #[test]
    fn rank_one_classification() {
        let t = TripleInput::new(
            WeilParams::new(11, 1).unwrap(),
            Lattice::new(IntMatrix::from_i64(&[&[2]])).unwrap(),
            IntMatrix::from_i64(&[&[11]]),
            RatVector::from_i64(&[1]),
            false,
        )
        .unwrap();
        let fd = t.frobenius_data();
        let ns = neron_severi(&fd);
        let c = classify_low_degree(&ns, &t.ample_point, 11, 3);
        assert_eq!(c.class, LowDegreeClass::SmallDegree);
        let c = classify_low_degree(&ns, &t.ample_point, 5, 3);
        assert_eq!(c.class, LowDegreeClass::None);
    }

    #[test]
    fn hyperbolic_plane_found() {
        let u = Lattice::hyperbolic_plane();
        let t = TripleInput::new(
            WeilParams::new(3, 1).unwrap(),
            u,
            IntMatrix::scalar(2, &b(3)),
            RatVector::from_i64(&[1, 1]),
            false,
        )
        .unwrap();
        let fd = t.frobenius_data();
        let ns = neron_severi(&fd);
        let c = classify_low_degree(&ns, &t.ample_point, 3, 1);
        assert_eq!(c.class, LowDegreeClass::HyperbolicPlane);
    }
}
