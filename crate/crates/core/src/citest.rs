//! Conditional-independence queries and the backends that answer them.
//!
//! Every backend sits behind [`CachedTester`], which canonicalizes queries,
//! memoizes answers and keeps the distinct/total call counts that the
//! benchmarks report.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::CiError;
use crate::graph::{Dag, NodeId, NodeSet};

/// A canonical CI statement `u ⟂ v | cond` with `u < v` and
/// `cond ∩ {u, v} = ∅`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CiQuery {
    u: NodeId,
    v: NodeId,
    cond: NodeSet,
}

impl CiQuery {
    /// Canonicalizes the endpoints and drops them from the conditioning set.
    pub fn new(a: NodeId, b: NodeId, cond: &NodeSet) -> Result<Self, CiError> {
        if a == b {
            return Err(CiError::SameEndpoints(a));
        }
        let (u, v) = if a < b { (a, b) } else { (b, a) };
        let mut cond = cond.clone();
        cond.remove(u);
        cond.remove(v);
        Ok(CiQuery { u, v, cond })
    }

    pub fn u(&self) -> NodeId {
        self.u
    }

    pub fn v(&self) -> NodeId {
        self.v
    }

    pub fn cond(&self) -> &NodeSet {
        &self.cond
    }

    fn max_node(&self) -> NodeId {
        self.cond.max_node().map_or(self.v, |c| c.max(self.v))
    }
}

impl fmt::Debug for CiQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for CiQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⟂ {} | {}", self.u, self.v, self.cond)
    }
}

/// Query accounting for one tester instance.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CiStats {
    pub distinct_queries: usize,
    pub total_calls: usize,
    /// Every call in order, when logging is enabled.
    pub query_log: Option<Vec<CiQuery>>,
}

/// Answers canonical queries. Implementations need not cache.
pub trait CiBackend {
    fn num_vars(&self) -> usize;

    /// `true` for independence.
    fn test(&mut self, q: &CiQuery) -> Result<bool, CiError>;
}

/// The interface the discovery algorithms consume.
pub trait CiTester {
    fn num_vars(&self) -> usize;

    fn independent(&mut self, u: NodeId, v: NodeId, cond: &NodeSet) -> Result<bool, CiError>;

    fn stats(&self) -> CiStats;
}

/// Memoizing, counting wrapper around a [`CiBackend`].
pub struct CachedTester<B> {
    backend: B,
    cache: HashMap<CiQuery, bool>,
    seen: HashSet<CiQuery>,
    memoize: bool,
    total_calls: usize,
    log: Option<Vec<CiQuery>>,
}

impl<B: CiBackend> CachedTester<B> {
    pub fn new(backend: B) -> Self {
        CachedTester {
            backend,
            cache: HashMap::new(),
            seen: HashSet::new(),
            memoize: true,
            total_calls: 0,
            log: None,
        }
    }

    /// Record every call in [`CiStats::query_log`].
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    /// Disable answer caching; counts are still tracked.
    pub fn without_cache(mut self) -> Self {
        self.memoize = false;
        self
    }

    pub fn backend(&self) -> &B {
        &self.backend
    }

    pub fn query(&mut self, q: &CiQuery) -> Result<bool, CiError> {
        let p = self.backend.num_vars();
        if q.max_node() >= p {
            return Err(CiError::NodeOutOfRange {
                node: q.max_node(),
                p,
            });
        }
        self.total_calls += 1;
        if let Some(log) = self.log.as_mut() {
            log.push(q.clone());
        }
        if self.memoize {
            if let Some(&ans) = self.cache.get(q) {
                return Ok(ans);
            }
        }
        let ans = self.backend.test(q)?;
        self.seen.insert(q.clone());
        if self.memoize {
            self.cache.insert(q.clone(), ans);
        }
        Ok(ans)
    }
}

impl<B: CiBackend> CiTester for CachedTester<B> {
    fn num_vars(&self) -> usize {
        self.backend.num_vars()
    }

    fn independent(&mut self, u: NodeId, v: NodeId, cond: &NodeSet) -> Result<bool, CiError> {
        let q = CiQuery::new(u, v, cond)?;
        self.query(&q)
    }

    fn stats(&self) -> CiStats {
        CiStats {
            distinct_queries: self.seen.len(),
            total_calls: self.total_calls,
            query_log: self.log.clone(),
        }
    }
}

/// Exact answers from d-separation in a known DAG.
#[derive(Debug, Clone)]
pub struct DSepOracle {
    dag: Dag,
}

impl DSepOracle {
    pub fn new(dag: Dag) -> Self {
        DSepOracle { dag }
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }
}

impl CiBackend for DSepOracle {
    fn num_vars(&self) -> usize {
        self.dag.num_nodes()
    }

    fn test(&mut self, q: &CiQuery) -> Result<bool, CiError> {
        Ok(oracle_independent(&self.dag, q))
    }
}

/// d-separation oracle with injected extra independencies, modelling a
/// distribution that is Markov but not faithful to the DAG.
#[derive(Debug, Clone)]
pub struct UnfaithfulOracle {
    dag: Dag,
    extra: HashSet<CiQuery>,
}

impl UnfaithfulOracle {
    pub fn new(dag: Dag, extra: impl IntoIterator<Item = CiQuery>) -> Self {
        UnfaithfulOracle {
            dag,
            extra: extra.into_iter().collect(),
        }
    }
}

impl CiBackend for UnfaithfulOracle {
    fn num_vars(&self) -> usize {
        self.dag.num_nodes()
    }

    fn test(&mut self, q: &CiQuery) -> Result<bool, CiError> {
        Ok(unfaithful_oracle_independent(&self.dag, &self.extra, q))
    }
}

pub fn oracle_independent(dag: &Dag, q: &CiQuery) -> bool {
    dag.d_separated(&NodeSet::singleton(q.u), &NodeSet::singleton(q.v), &q.cond)
        .expect("canonical query has disjoint endpoints")
}

pub fn unfaithful_oracle_independent(dag: &Dag, extra: &HashSet<CiQuery>, q: &CiQuery) -> bool {
    extra.contains(q) || oracle_independent(dag, q)
}

/// A column-labelled sample matrix (`n` rows, one column per variable).
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>) -> Self {
        let names = (0..values.ncols()).map(|j| format!("X{j}")).collect();
        Dataset { names, values }
    }

    /// Reads a CSV with a header row; column order defines node ids.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, csv::Error> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut flat = Vec::new();
        let mut rows = 0;
        for rec in rdr.deserialize::<Vec<f64>>() {
            let row = rec?;
            if row.len() != names.len() {
                return Err(csv::Error::from(std::io::Error::new(
                    std::io::ErrorKind::InvalidData,
                    format!("row {} has {} fields, expected {}", rows + 1, row.len(), names.len()),
                )));
            }
            flat.extend(row);
            rows += 1;
        }
        Ok(Dataset {
            values: DMatrix::from_row_slice(rows, names.len(), &flat),
            names,
        })
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for i in 0..self.values.nrows() {
            w.write_record(self.values.row(i).iter().map(|x| format!("{x}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_vars(&self) -> usize {
        self.values.ncols()
    }
}

/// Sample covariance (denominator `n - 1`).
pub fn sample_covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows();
    let means = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    let denom = (n.max(2) - 1) as f64;
    (centered.transpose() * &centered) / denom
}

const MAX_CONDITION: f64 = 1e12;
const R_CLAMP: f64 = 1.0 - 1e-12;

/// Partial correlation of `u` and `v` given `cond`, from the inverse of the
/// `(|cond|+2)`-dimensional covariance submatrix.
pub fn partial_correlation(cov: &DMatrix<f64>, q: &CiQuery) -> Result<f64, CiError> {
    let idx: Vec<NodeId> = [q.u, q.v].into_iter().chain(q.cond.iter()).collect();
    let k = idx.len();
    let sub = DMatrix::from_fn(k, k, |i, j| cov[(idx[i], idx[j])]);
    let eig = sub.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x.abs())));
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(CiError::Singular(condition));
    }
    let prec = match sub.clone().cholesky() {
        Some(ch) => ch.inverse(),
        None => sub.pseudo_inverse(1e-15).map_err(|_| CiError::Singular(condition))?,
    };
    let r = -prec[(0, 1)] / (prec[(0, 0)] * prec[(1, 1)]).sqrt();
    Ok(r)
}

/// Fisher z statistic `sqrt(n - |cond| - 3) * |atanh(r)|`.
pub fn fisher_z_statistic(r: f64, n: usize, cond_len: usize) -> f64 {
    let r = r.clamp(-R_CLAMP, R_CLAMP);
    let z = 0.5 * ((1.0 + r) / (1.0 - r)).ln();
    ((n - cond_len - 3) as f64).sqrt() * z.abs()
}

/// Two-sided critical value `Φ⁻¹(1 - alpha/2)`.
pub fn critical_value(alpha: f64) -> Result<f64, CiError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(CiError::InvalidAlpha(alpha));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(1.0 - alpha / 2.0))
}

/// One-shot Fisher-z test on raw data. Prefer [`FisherZ`] for repeated
/// queries, which computes the covariance once.
pub fn fisherz_independent(data: &DMatrix<f64>, q: &CiQuery, alpha: f64) -> Result<bool, CiError> {
    FisherZ::new(data, alpha)?.test(q)
}

/// Gaussian CI test via Fisher's z-transform of the partial correlation.
#[derive(Debug, Clone)]
pub struct FisherZ {
    cov: DMatrix<f64>,
    n: usize,
    alpha: f64,
    critical: f64,
}

impl FisherZ {
    pub fn new(data: &DMatrix<f64>, alpha: f64) -> Result<Self, CiError> {
        let critical = critical_value(alpha)?;
        Ok(FisherZ {
            cov: sample_covariance(data),
            n: data.nrows(),
            alpha,
            critical,
        })
    }

    /// Test from a known covariance matrix, as if estimated from `n` samples.
    pub fn from_covariance(cov: DMatrix<f64>, n: usize, alpha: f64) -> Result<Self, CiError> {
        let critical = critical_value(alpha)?;
        Ok(FisherZ {
            cov,
            n,
            alpha,
            critical,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn statistic(&self, q: &CiQuery) -> Result<f64, CiError> {
        let needed = q.cond.len() + 3;
        if self.n <= needed {
            return Err(CiError::InsufficientSamples {
                have: self.n,
                needed,
                cond: q.cond.len(),
            });
        }
        let r = partial_correlation(&self.cov, q)?;
        Ok(fisher_z_statistic(r, self.n, q.cond.len()))
    }
}

impl CiBackend for FisherZ {
    fn num_vars(&self) -> usize {
        self.cov.ncols()
    }

    fn test(&mut self, q: &CiQuery) -> Result<bool, CiError> {
        Ok(self.statistic(q)? <= self.critical)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{sample_sem, SemModel};

    fn s(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    fn q(u: usize, v: usize, c: &[usize]) -> CiQuery {
        CiQuery::new(u, v, &s(c)).unwrap()
    }

    #[test]
    fn queries_are_canonical() {
        assert_eq!(q(3, 1, &[2, 1, 3]), q(1, 3, &[2]));
        assert_eq!(q(3, 1, &[2]).to_string(), "1 ⟂ 3 | {2}");
        assert_eq!(CiQuery::new(2, 2, &s(&[])).unwrap_err(), CiError::SameEndpoints(2));
    }

    #[test]
    fn oracle_examples() {
        let col = Dag::new(3, &[(0, 1), (2, 1)]).unwrap();
        assert!(oracle_independent(&col, &q(0, 2, &[])));
        assert!(!oracle_independent(&col, &q(0, 2, &[1])));
        let app_c = Dag::new(5, &[(0, 2), (1, 2), (1, 4), (2, 3), (3, 4)]).unwrap();
        // S = {0,1} folded into the conditioning set
        assert!(oracle_independent(&app_c, &q(0, 3, &[0, 1, 2])));
    }

    #[test]
    fn unfaithful_oracle_examples() {
        let g = Dag::new(4, &[(0, 1), (0, 3), (1, 3), (2, 3)]).unwrap();
        let extra: HashSet<CiQuery> = [q(0, 1, &[2, 3])].into_iter().collect();
        assert!(unfaithful_oracle_independent(&g, &extra, &q(0, 1, &[2, 3])));
        assert!(!oracle_independent(&g, &q(0, 1, &[2, 3])));
        assert!(!unfaithful_oracle_independent(&g, &extra, &q(0, 1, &[])));
        let none = HashSet::new();
        for c in [vec![], vec![2], vec![3], vec![2, 3]] {
            for (a, b) in [(0, 1), (0, 2), (1, 2), (2, 3)] {
                let qq = q(a, b, &c);
                assert_eq!(unfaithful_oracle_independent(&g, &none, &qq), oracle_independent(&g, &qq));
            }
        }
    }

    #[test]
    fn cached_tester_counts_distinct_queries() {
        let g = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let mut t = CachedTester::new(DSepOracle::new(g)).with_log();
        assert!(!t.independent(0, 2, &s(&[])).unwrap());
        assert!(!t.independent(2, 0, &s(&[])).unwrap());
        assert!(t.independent(2, 0, &s(&[1, 0])).unwrap());
        let st = t.stats();
        assert_eq!(st.total_calls, 3);
        assert_eq!(st.distinct_queries, 2);
        assert_eq!(st.query_log.unwrap().len(), 3);
        assert!(matches!(t.independent(0, 5, &s(&[])), Err(CiError::NodeOutOfRange { .. })));
    }

    #[test]
    fn cache_does_not_change_answers() {
        let g = Dag::new(4, &[(0, 1), (2, 1), (1, 3)]).unwrap();
        let mut a = CachedTester::new(DSepOracle::new(g.clone()));
        let mut b = CachedTester::new(DSepOracle::new(g)).without_cache();
        for _ in 0..2 {
            for (u, v) in [(0, 2), (0, 3), (2, 3)] {
                for c in [vec![], vec![1], vec![3], vec![1, 3]] {
                    assert_eq!(
                        a.independent(u, v, &s(&c)).unwrap(),
                        b.independent(u, v, &s(&c)).unwrap()
                    );
                }
            }
        }
        assert_eq!(a.stats().distinct_queries, b.stats().distinct_queries);
        assert_eq!(a.stats().total_calls, b.stats().total_calls);
    }

    #[test]
    fn zero_correlation_is_independent() {
        assert_eq!(fisher_z_statistic(0.0, 100, 2), 0.0);
        let cov = DMatrix::<f64>::identity(3, 3);
        let mut t = FisherZ::from_covariance(cov, 50, 0.999).unwrap();
        assert!(t.test(&q(0, 1, &[2])).unwrap());
    }

    #[test]
    fn fisherz_rejects_bad_inputs() {
        assert_eq!(critical_value(0.0).unwrap_err(), CiError::InvalidAlpha(0.0));
        assert!(critical_value(1.0).is_err());
        assert!((critical_value(0.05).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);

        let t = FisherZ::from_covariance(DMatrix::identity(4, 4), 5, 0.05).unwrap();
        assert!(matches!(t.statistic(&q(0, 1, &[2, 3])), Err(CiError::InsufficientSamples { .. })));

        // column 2 duplicates column 0
        let cov = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0, 0.3, 1.0]);
        let t = FisherZ::from_covariance(cov, 100, 0.05).unwrap();
        assert!(matches!(t.statistic(&q(0, 1, &[2])), Err(CiError::Singular(_))));
    }

    #[test]
    fn partial_correlation_matches_closed_form() {
        // x -> y, weight 0.5: corr = 0.5 / sqrt(1.25)
        let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.25]);
        let r = partial_correlation(&cov, &q(0, 1, &[])).unwrap();
        assert!((r - 0.5 / 1.25f64.sqrt()).abs() < 1e-12);
        // chain 0 -> 1 -> 2: 0 and 2 uncorrelated given 1
        let g = Dag::new(3, &[(0, 1), (1, 2)]).unwrap();
        let m = SemModel::with_weights(g, &[((0, 1), 0.8), ((1, 2), -0.6)]).unwrap();
        let cov = m.population_covariance();
        assert!(partial_correlation(&cov, &q(0, 2, &[1])).unwrap().abs() < 1e-12);
        assert!(partial_correlation(&cov, &q(0, 2, &[])).unwrap().abs() > 0.1);
    }

    #[test]
    fn fisherz_detects_strong_dependence() {
        let g = Dag::new(2, &[(0, 1)]).unwrap();
        let m = SemModel::with_weights(g, &[((0, 1), 0.5)]).unwrap();
        let data = sample_sem(&m, 10_000, 3);
        assert!(!fisherz_independent(&data, &q(0, 1, &[]), 0.05).unwrap());
    }

    #[test]
    fn csv_roundtrip() {
        let ds = Dataset::new(DMatrix::from_row_slice(2, 2, &[1.0, -2.5, 0.25, 3.0]));
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        let back = Dataset::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ds);
        assert!(Dataset::from_csv("a,b\n1,2\n3\n".as_bytes()).is_err());
    }
}
