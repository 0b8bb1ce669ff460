//! Enumeration of ordinary `q²`-Weil polynomials with a trace ceiling.
//!
//! A candidate of degree `2n` is written `P(t) = tⁿ R(t + q²/t)` times
//! forced factors `(t − q)^{k₊} (t + q)^{k₋}`, where `R` is monic of degree
//! `n` with all roots in `[−2q, 2q]`. The search is a depth-first walk over
//! the coefficients `c_{n−1}, c_{n−2}, …, c₀` of `R` in ascending
//! lexicographic order. Cuts are optional; every emitted record is
//! re-certified exactly.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{isolate_roots, squarefree_part, sturm_count, IntPoly, SturmSequence};
use crate::format::{self, hex_digest, strings, FormatError};
use crate::padic::{newton_polygon, slope_strings};
use crate::weil::{inverse_trace_transform, is_weil_q2, WeilParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SearchError {
    #[error("degree {degree} minus forced factors {forced} must be even and nonnegative")]
    Degree { degree: usize, forced: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpec {
    pub params: WeilParams,
    /// Total degree of `P`, forced factors included.
    pub degree: usize,
    /// Candidates satisfy `tr P ≤ trace_max`.
    pub trace_max: BigInt,
    /// Number of forced `(t − q)` factors.
    pub forced_plus: usize,
    /// Number of forced `(t + q)` factors.
    pub forced_minus: usize,
    /// `false` disables the heuristic cuts (audit mode).
    pub prune: bool,
}

impl SearchSpec {
    pub fn new(params: WeilParams, degree: usize, trace_max: BigInt) -> Result<Self, SearchError> {
        let spec = SearchSpec {
            params,
            degree,
            trace_max,
            forced_plus: 0,
            forced_minus: 0,
            prune: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Trace ceiling that admits every candidate.
    pub fn unbounded(params: WeilParams, degree: usize) -> Result<Self, SearchError> {
        let t = params.q() * BigInt::from(degree);
        Self::new(params, degree, t)
    }

    pub fn with_forced(mut self, plus: usize, minus: usize) -> Result<Self, SearchError> {
        self.forced_plus = plus;
        self.forced_minus = minus;
        self.validate()?;
        Ok(self)
    }

    pub fn audit(mut self) -> Self {
        self.prune = false;
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        let forced = self.forced_plus + self.forced_minus;
        if forced > self.degree || (self.degree - forced) % 2 != 0 {
            return Err(SearchError::Degree {
                degree: self.degree,
                forced,
            });
        }
        Ok(())
    }

    /// Degree of `R`.
    pub fn half_degree(&self) -> usize {
        (self.degree - self.forced_plus - self.forced_minus) / 2
    }

    fn q(&self) -> &BigInt {
        self.params.q()
    }

    /// Trace contributed by the forced factors.
    fn forced_trace(&self) -> BigInt {
        self.q() * (BigInt::from(self.forced_plus) - BigInt::from(self.forced_minus))
    }

    /// The space is empty when the ceiling is below `−degree·q`.
    pub fn is_trivially_empty(&self) -> bool {
        self.trace_max < -(self.q() * BigInt::from(self.degree))
    }

    /// Canonical text of the spec, used for checkpoint matching.
    pub fn canonical(&self) -> String {
        format!(
            "p={};a={};q={};degree={};trace_max={};forced_plus={};forced_minus={};prune={}",
            self.params.p(),
            self.params.a(),
            self.q(),
            self.degree,
            self.trace_max,
            self.forced_plus,
            self.forced_minus,
            self.prune
        )
    }

    pub fn digest(&self) -> String {
        hex_digest(self.canonical().as_bytes())
    }
}

/// One emitted polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateRecord {
    pub p: IntPoly,
    pub r: IntPoly,
    pub trace: BigInt,
    pub slopes: Vec<(String, usize)>,
    pub ordinary: bool,
}

impl CandidateRecord {
    /// Single-line JSON, coefficients ascending.
    pub fn to_line(&self) -> String {
        json!({
            "p": strings(self.p.coeffs()),
            "r": strings(self.r.coeffs()),
            "trace": self.trace.to_string(),
            "slopes": self.slopes,
            "ordinary": self.ordinary,
        })
        .to_string()
    }
}

/// Per-cut node counts. Every visited node is pruned by exactly one cut,
/// expanded, or certified at a leaf:
/// `nodes = Σ pruned + internal + emitted + leaf_rejected`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub internal: u64,
    pub emitted: u64,
    pub leaf_rejected: u64,
    pub pruned_trace: u64,
    pub pruned_p_divides_trace: u64,
    pub pruned_derivative: u64,
    pub pruned_interval: u64,
    pub pruned_valuation: u64,
}

impl SearchStats {
    pub fn merge(&mut self, o: &SearchStats) {
        self.nodes += o.nodes;
        self.internal += o.internal;
        self.emitted += o.emitted;
        self.leaf_rejected += o.leaf_rejected;
        self.pruned_trace += o.pruned_trace;
        self.pruned_p_divides_trace += o.pruned_p_divides_trace;
        self.pruned_derivative += o.pruned_derivative;
        self.pruned_interval += o.pruned_interval;
        self.pruned_valuation += o.pruned_valuation;
    }

    pub fn pruned(&self) -> u64 {
        self.pruned_trace
            + self.pruned_p_divides_trace
            + self.pruned_derivative
            + self.pruned_interval
            + self.pruned_valuation
    }
}

#[derive(Debug, Clone)]
pub struct SearchRun {
    pub records: Vec<CandidateRecord>,
    pub stats: SearchStats,
    pub elapsed: Duration,
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// `|c_{n−k}| ≤ C(n, k)(2q)^k`.
pub fn coefficient_bound(n: usize, k: usize, q: &BigInt) -> BigInt {
    binomial(n, k) * num_traits::pow(q * 2, k)
}

/// All complex roots of `f` are real and lie in `[lo, hi]`.
fn all_roots_in(f: &IntPoly, lo: &BigInt, hi: &BigInt) -> bool {
    if f.deg() == 0 {
        return true;
    }
    let sf = squarefree_part(f);
    let lo_r = BigRational::from_integer(lo.clone());
    let hi_r = BigRational::from_integer(hi.clone());
    let inside = sturm_count(&sf, &lo_r, &hi_r).expect("nonzero squarefree, lo < hi");
    let at_lo = usize::from(sf.eval(lo).is_zero());
    inside + at_lo == sf.deg()
}

/// `R^{(m)}` given the top coefficients `c_n = 1, c_{n−1}, …, c_m`.
fn top_derivative(n: usize, fixed: &[BigInt]) -> IntPoly {
    let m = n - fixed.len();
    let mut coeffs = vec![BigInt::zero(); n - m + 1];
    for i in m..=n {
        let c = if i == n {
            BigInt::one()
        } else {
            fixed[n - 1 - i].clone()
        };
        let falling: BigInt = ((i - m + 1)..=i).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
        coeffs[i - m] = c * falling;
    }
    IntPoly::new(coeffs)
}

fn r_poly(n: usize, fixed: &[BigInt]) -> IntPoly {
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    for (j, c) in fixed.iter().enumerate() {
        coeffs[n - 1 - j] = c.clone();
    }
    IntPoly::new(coeffs)
}

/// Assembles `P` from `R` and the forced factors.
pub fn assemble(spec: &SearchSpec, r: &IntPoly) -> IntPoly {
    let q = spec.q();
    let mut p = inverse_trace_transform(r, q);
    let plus = IntPoly::linear_root(q);
    let minus = IntPoly::linear_root(&-q);
    for _ in 0..spec.forced_plus {
        p = &p * &plus;
    }
    for _ in 0..spec.forced_minus {
        p = &p * &minus;
    }
    p
}

/// Exact certification of an assembled polynomial: `q²`-Weil and Newton
/// polygon `{0: 1, a: d − 2, 2a: 1}`.
pub fn certify(spec: &SearchSpec, p: &IntPoly) -> Option<Vec<(String, usize)>> {
    if !is_weil_q2(p, spec.q()).unwrap_or(false) {
        return None;
    }
    let d = p.deg();
    if d < 2 {
        return None;
    }
    let np = newton_polygon(p, spec.params.p()).ok()?;
    np.matches_shape(spec.params.a(), (1, d - 2, 1))
        .then(|| slope_strings(&np))
}

/// Residue class `(r, M)` forced on `c_{n−j}` (with `j = fixed.len() + 1`)
/// by the ordinary Newton shape: the coefficient of `t^{2n−j}` in
/// `tⁿ R(t + q²/t)` must be divisible by `q^{j−1}`. `None` for `j = 1`.
pub fn valuation_residue(n: usize, fixed: &[BigInt], q: &BigInt) -> Option<(BigInt, BigInt)> {
    let j = fixed.len() + 1;
    if j < 2 {
        return None;
    }
    let modulus = num_traits::pow(q.clone(), j - 1);
    let mut s = BigInt::zero();
    for i in (n + 1 - j)..=n {
        let e = i + j - n;
        if e % 2 != 0 {
            continue;
        }
        let c = if i == n {
            BigInt::one()
        } else {
            fixed[n - 1 - i].clone()
        };
        s += c * binomial(i, e / 2) * num_traits::pow(q.clone(), e);
    }
    Some(((-s).mod_floor(&modulus), modulus))
}

/// Isolating intervals of the roots of `f` in `(−2q − 1, 2q]`, descending and
/// repeated by multiplicity; empty unless all roots of `f` are found there.
fn critical_points(f: &IntPoly, two_q: &BigInt) -> Vec<(BigRational, BigRational)> {
    let sf = squarefree_part(f);
    let Ok(seq) = SturmSequence::new(&sf) else {
        return Vec::new();
    };
    let lo = BigRational::from_integer(-two_q - 1u32);
    let hi = BigRational::from_integer(two_q.clone());
    let width = BigRational::new(BigInt::one(), BigInt::from(1u64 << 16));
    let roots = isolate_roots(&seq, &lo, &hi, &width);
    // g_0 = f, g_{i+1} = gcd(g_i, g_i'): a root of multiplicity μ divides g_0..g_{μ-1}.
    let mut chain = vec![f.clone()];
    while chain.last().unwrap().deg() > 0 {
        let g = chain.last().unwrap();
        let next = IntPoly::gcd(g, &g.derivative());
        chain.push(next);
    }
    let mut out = Vec::with_capacity(f.deg());
    for (a, b) in roots.into_iter().rev() {
        let mult = chain
            .iter()
            .take_while(|g| g.deg() > 0 && sturm_count(&squarefree_part(g), &a, &b).unwrap_or(0) > 0)
            .count();
        out.extend(std::iter::repeat((a.clone(), b.clone())).take(mult.max(1)));
    }
    if out.len() == f.deg() {
        out
    } else {
        Vec::new()
    }
}

/// Superset of the values of `c_m` (where `m = n − 1 − fixed.len()`) for
/// which `R^{(m)}` can have all roots in `[−2q, 2q]`.
///
/// With `f = R^{(m)} = D + m!·c_m` of degree `k`, real-rootedness in the
/// interval forces `f(2q) ≥ 0`, `(−1)^k f(−2q) ≥ 0` and, at the critical
/// points `y_1 > y_2 > …` of `f`, `(−1)^j f(y_j) ≥ 0`. Critical points are
/// isolated exactly; `D(y_j)` is bounded by its value at the interval
/// midpoint plus `sup|D'| · width`. `None` when no bound is derived.
pub fn next_coefficient_range(n: usize, fixed: &[BigInt], two_q: &BigInt) -> Option<(BigInt, BigInt)> {
    let m = n - 1 - fixed.len();
    let k = n - m;
    let mut with_zero = fixed.to_vec();
    with_zero.push(BigInt::zero());
    let d = top_derivative(n, &with_zero);
    let fp = top_derivative(n, fixed);
    let mfact: BigInt = (1..=m).fold(BigInt::one(), |acc, j| acc * BigInt::from(j));
    let rat = |x: &BigInt| BigRational::from_integer(x.clone());
    // Bounds on m!·c_m.
    let mut lower: Vec<BigRational> = vec![-rat(&d.eval(two_q))];
    let mut upper: Vec<BigRational> = Vec::new();
    let at_neg = -rat(&d.eval(&-two_q));
    if k % 2 == 0 {
        lower.push(at_neg);
    } else {
        upper.push(at_neg);
    }
    if fp.deg() >= 1 {
        for (j, (a, b)) in critical_points(&fp, two_q).iter().enumerate() {
            let mid = (a + b) / BigRational::from_integer(BigInt::from(2));
            let bound = a.abs().max(b.abs());
            let slope: BigRational = fp
                .coeffs()
                .iter()
                .enumerate()
                .map(|(i, c)| rat(&c.abs()) * num_traits::pow(bound.clone(), i))
                .sum();
            let err = slope * (b - a);
            let v = -d.eval_rational(&mid);
            if j % 2 == 0 {
                upper.push(v + err);
            } else {
                lower.push(v - err);
            }
        }
    }
    let lo = lower.into_iter().max()?;
    let lo = (lo / rat(&mfact)).ceil().to_integer();
    let hi = match upper.into_iter().min() {
        Some(u) => (u / rat(&mfact)).floor().to_integer(),
        None => return Some((lo, coefficient_bound(n, fixed.len() + 1, &(two_q / 2u32)))),
    };
    Some((lo, hi))
}

struct Walker<'a> {
    spec: &'a SearchSpec,
    n: usize,
    two_q: BigInt,
    stats: SearchStats,
    out: Vec<CandidateRecord>,
}

enum Node {
    Pruned,
    Expand,
    Leaf,
}

impl<'a> Walker<'a> {
    fn new(spec: &'a SearchSpec) -> Self {
        Walker {
            spec,
            n: spec.half_degree(),
            two_q: spec.q() * 2,
            stats: SearchStats::default(),
            out: Vec::new(),
        }
    }

    fn range(&self, depth: usize) -> (BigInt, BigInt) {
        let b = coefficient_bound(self.n, depth + 1, self.spec.q());
        (-b.clone(), b)
    }

    /// Values of the next coefficient to visit, as `(first, last, step)`.
    /// With pruning on, the box is narrowed by [`next_coefficient_range`]
    /// and by [`valuation_residue`]; excluded values count as pruned nodes.
    fn child_range(&mut self, fixed: &[BigInt]) -> (BigInt, BigInt, BigInt) {
        let (lo, hi) = self.range(fixed.len());
        if !self.spec.prune {
            return (lo, hi, BigInt::one());
        }
        let (nlo, nhi) = match next_coefficient_range(self.n, fixed, &self.two_q) {
            Some((a, b)) => (a.max(lo.clone()), b.min(hi.clone())),
            None => (lo.clone(), hi.clone()),
        };
        let count = |a: &BigInt, b: &BigInt| if b >= a { b - a + 1u32 } else { BigInt::zero() };
        let to_u64 = |x: BigInt| u64::try_from(x).unwrap_or(u64::MAX);
        let full = count(&lo, &hi);
        let kept = count(&nlo, &nhi);
        let by_interval = to_u64(&full - &kept);
        let (first, step) = match valuation_residue(self.n, fixed, self.spec.q()) {
            Some((r, m)) => (&nlo + (&r - &nlo).mod_floor(&m), m),
            None => (nlo.clone(), BigInt::one()),
        };
        let on_grid = if first <= nhi {
            (&nhi - &first) / &step + 1u32
        } else {
            BigInt::zero()
        };
        let by_valuation = to_u64(kept - on_grid);
        self.stats.nodes += by_interval + by_valuation;
        self.stats.pruned_interval += by_interval;
        self.stats.pruned_valuation += by_valuation;
        (first, nhi, step)
    }

    /// Classifies the node whose last fixed coefficient is `fixed.last()`.
    fn classify(&mut self, fixed: &[BigInt]) -> Node {
        self.stats.nodes += 1;
        let n = self.n;
        let depth = fixed.len();
        if depth == 1 {
            let trace = self.spec.forced_trace() - &fixed[0];
            if self.spec.prune && trace > self.spec.trace_max {
                self.stats.pruned_trace += 1;
                return Node::Pruned;
            }
            if self.spec.prune && trace.is_multiple_of(&BigInt::from(self.spec.params.p())) {
                self.stats.pruned_p_divides_trace += 1;
                return Node::Pruned;
            }
        }
        if depth < n {
            if self.spec.prune && !all_roots_in(&top_derivative(n, fixed), &-&self.two_q, &self.two_q) {
                self.stats.pruned_derivative += 1;
                return Node::Pruned;
            }
            self.stats.internal += 1;
            return Node::Expand;
        }
        Node::Leaf
    }

    fn leaf(&mut self, fixed: &[BigInt]) {
        let r = r_poly(self.n, fixed);
        let trace = if self.n == 0 {
            self.spec.forced_trace()
        } else {
            self.spec.forced_trace() - r.coeff(self.n - 1)
        };
        let accepted = trace <= self.spec.trace_max && all_roots_in(&r, &-&self.two_q, &self.two_q);
        let record = accepted.then(|| assemble(self.spec, &r)).and_then(|p| {
            certify(self.spec, &p).map(|slopes| CandidateRecord {
                p,
                r: r.clone(),
                trace: trace.clone(),
                slopes,
                ordinary: true,
            })
        });
        match record {
            Some(rec) => {
                self.stats.emitted += 1;
                self.out.push(rec);
            }
            None => self.stats.leaf_rejected += 1,
        }
    }

    fn dfs(&mut self, fixed: &mut Vec<BigInt>) {
        if fixed.len() == self.n {
            self.leaf(fixed);
            return;
        }
        let (lo, hi, step) = self.child_range(fixed);
        let mut c = lo;
        while c <= hi {
            fixed.push(c.clone());
            match self.classify(fixed) {
                Node::Pruned => {}
                Node::Expand => self.dfs(fixed),
                Node::Leaf => self.leaf(fixed),
            }
            fixed.pop();
            c += &step;
        }
    }

    /// Surviving prefixes of length `depth`, in order.
    fn prefixes(&mut self, fixed: &mut Vec<BigInt>, depth: usize, out: &mut Vec<Vec<BigInt>>) {
        if fixed.len() == depth {
            out.push(fixed.clone());
            return;
        }
        let (lo, hi, step) = self.child_range(fixed);
        let mut c = lo;
        while c <= hi {
            fixed.push(c.clone());
            match self.classify(fixed) {
                Node::Pruned => {}
                Node::Expand => self.prefixes(fixed, depth, out),
                Node::Leaf => self.leaf(fixed),
            }
            fixed.pop();
            c += &step;
        }
    }
}

/// Default partition depth for parallel runs and checkpoints.
pub fn default_prefix_depth(spec: &SearchSpec) -> usize {
    spec.half_degree().min(2)
}

/// Work units of the search: surviving coefficient prefixes, plus records
/// and stats for anything resolved above the partition depth.
pub struct Partition {
    pub prefixes: Vec<Vec<BigInt>>,
    pub records: Vec<CandidateRecord>,
    pub stats: SearchStats,
}

pub fn partition(spec: &SearchSpec, depth: usize) -> Partition {
    let mut w = Walker::new(spec);
    let mut prefixes = Vec::new();
    if !spec.is_trivially_empty() {
        if w.n == 0 {
            w.leaf(&[]);
        } else {
            w.prefixes(&mut Vec::new(), depth.clamp(1, w.n), &mut prefixes);
        }
    }
    // A prefix of full length was already handled as a leaf.
    prefixes.retain(|p| p.len() < w.n);
    Partition {
        prefixes,
        records: w.out,
        stats: w.stats,
    }
}

/// Explores the subtree below one prefix.
pub fn explore(spec: &SearchSpec, prefix: &[BigInt]) -> (Vec<CandidateRecord>, SearchStats) {
    let mut w = Walker::new(spec);
    let mut fixed = prefix.to_vec();
    w.dfs(&mut fixed);
    (w.out, w.stats)
}

fn sort_key(r: &CandidateRecord) -> Vec<BigInt> {
    r.r.coeffs().iter().rev().skip(1).cloned().collect()
}

/// Explores `prefixes` with up to `workers` threads; output order is the
/// prefix order regardless of scheduling.
pub fn explore_all(spec: &SearchSpec, prefixes: &[Vec<BigInt>], workers: usize) -> (Vec<CandidateRecord>, SearchStats) {
    let parts: Vec<(Vec<CandidateRecord>, SearchStats)> = if workers <= 1 {
        prefixes.iter().map(|p| explore(spec, p)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        pool.install(|| prefixes.par_iter().map(|p| explore(spec, p)).collect())
    };
    let mut stats = SearchStats::default();
    let mut records = Vec::new();
    for (r, s) in parts {
        records.extend(r);
        stats.merge(&s);
    }
    (records, stats)
}

/// Full enumeration with `workers` threads (`1` for a single-threaded run).
pub fn enumerate_with_workers(spec: &SearchSpec, workers: usize) -> SearchRun {
    let start = Instant::now();
    let part = partition(spec, default_prefix_depth(spec));
    let (mut records, sub) = explore_all(spec, &part.prefixes, workers);
    records.extend(part.records);
    records.sort_by_key(sort_key);
    let mut stats = part.stats;
    stats.merge(&sub);
    SearchRun {
        records,
        stats,
        elapsed: start.elapsed(),
    }
}

/// Single-threaded enumeration in lexicographic order of `R`'s coefficients.
pub fn enumerate_ordinary_weil(spec: &SearchSpec) -> SearchRun {
    enumerate_with_workers(spec, 1)
}

/// Outcome of [`question_search`].
#[derive(Debug, Clone)]
pub struct QuestionRun {
    pub run: Option<SearchRun>,
    pub explanation: String,
}

/// Records are polynomial-level candidates only; no lattice realization is
/// claimed.
pub const REALIZATION_NOTE: &str =
    "candidates satisfy the polynomial-level conditions only; no F on a lattice realizing them is established";

/// Enumerates candidates with `1 + tr P + q² < 0`.
pub fn question_search(params: WeilParams, degree: usize, workers: usize) -> Result<QuestionRun, SearchError> {
    let q = params.q().clone();
    let trace_max = -(BigInt::one() + &q * &q) - 1;
    let spec = SearchSpec::new(params, degree, trace_max)?;
    let reach: BigInt = &q * &q - BigInt::from(degree) * &q + 1;
    if !reach.is_negative() {
        return Ok(QuestionRun {
            run: None,
            explanation: format!(
                "empty: tr P >= -{degree}q, so 1 + tr P + q^2 < 0 needs q^2 - {degree}q + 1 < 0, which fails for q = {q}"
            ),
        });
    }
    Ok(QuestionRun {
        run: Some(enumerate_with_workers(&spec, workers)),
        explanation: REALIZATION_NOTE.into(),
    })
}

/// Resume point of a chunked run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub spec_digest: String,
    pub prefix_depth: usize,
    /// Index into the prefix list of the next unexplored prefix.
    pub next_prefix: usize,
    /// Last completed prefix, for cross-checking.
    pub last_prefix: Option<Vec<BigInt>>,
    /// Length of the output file at the checkpoint.
    pub output_bytes: u64,
}

impl Checkpoint {
    pub fn emit(&self) -> String {
        let v = json!({
            "format_version": format::FORMAT_VERSION,
            "spec_digest": self.spec_digest,
            "prefix_depth": self.prefix_depth,
            "next_prefix": self.next_prefix,
            "last_prefix": self.last_prefix.as_ref().map(|p| strings(p)),
            "output_bytes": self.output_bytes,
        });
        format::to_pretty(&v)
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let v: Value = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
        let field = |k: &'static str| v.get(k).ok_or(FormatError::Missing(k));
        let bad = |k: &str| FormatError::Invalid {
            field: k.into(),
            reason: "wrong type".into(),
        };
        let spec_digest = field("spec_digest")?
            .as_str()
            .ok_or_else(|| bad("spec_digest"))?
            .to_string();
        let prefix_depth = field("prefix_depth")?.as_u64().ok_or_else(|| bad("prefix_depth"))? as usize;
        let next_prefix = field("next_prefix")?.as_u64().ok_or_else(|| bad("next_prefix"))? as usize;
        let output_bytes = field("output_bytes")?.as_u64().ok_or_else(|| bad("output_bytes"))?;
        let last_prefix = match v.get("last_prefix") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) => Some(
                a.iter()
                    .map(|x| {
                        x.as_str()
                            .and_then(|s| s.parse::<BigInt>().ok())
                            .ok_or_else(|| bad("last_prefix"))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(_) => return Err(bad("last_prefix")),
        };
        Ok(Checkpoint {
            spec_digest,
            prefix_depth,
            next_prefix,
            last_prefix,
            output_bytes,
        })
    }
}
