//! Ground-truth DAGs (Erdős–Rényi and scale-free), edge weights, and
//! linear-SEM sampling.

use serde::{Deserialize, Serialize};

use crate::dag::{is_dag, topological_sort, TopoOrder};
use crate::error::{arg_err, Error, Result};
use crate::linalg::{cholesky, lu_solve};
use crate::matrix::DenseMatrix;
use crate::objective::Dataset;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphScheme {
    Er,
    Sf,
}

impl std::str::FromStr for GraphScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "er" => Ok(GraphScheme::Er),
            "sf" => Ok(GraphScheme::Sf),
            other => arg_err(format!("unknown graph scheme {other:?} (expected er or sf)")),
        }
    }
}

impl std::fmt::Display for GraphScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GraphScheme::Er => "er",
            GraphScheme::Sf => "sf",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Gumbel,
    None,
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(NoiseKind::Gaussian),
            "gumbel" => Ok(NoiseKind::Gumbel),
            "none" => Ok(NoiseKind::None),
            other => arg_err(format!("unknown noise {other:?} (expected gaussian, gumbel or none)")),
        }
    }
}

impl std::fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Gumbel => "gumbel",
            NoiseKind::None => "none",
        })
    }
}

/// A random-graph recipe: `k` is the expected number of edges per node, so
/// ERk and SFk graphs have about `k * d` edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub d: usize,
    pub scheme: GraphScheme,
    pub k: f64,
    pub seed: u64,
}

impl GraphSpec {
    pub fn validate(&self) -> Result<()> {
        let d = self.d;
        if d < 2 {
            return arg_err(format!("graphs need d >= 2, got {d}"));
        }
        if !(self.k >= 1.0) || !self.k.is_finite() {
            return arg_err(format!("k must be >= 1, got {}", self.k));
        }
        match self.scheme {
            GraphScheme::Er => {
                if self.k * d as f64 > (d * (d - 1)) as f64 / 2.0 {
                    return arg_err(format!(
                        "ER{} on {d} nodes needs {} expected edges but only {} pairs exist (k <= (d-1)/2)",
                        self.k,
                        self.k * d as f64,
                        d * (d - 1) / 2
                    ));
                }
            }
            GraphScheme::Sf => {
                if self.k.fract() != 0.0 || self.k >= d as f64 {
                    return arg_err(format!("SF needs an integer k < d, got k={} d={d}", self.k));
                }
            }
        }
        Ok(())
    }
}

fn relabel(b: &DenseMatrix, perm: &[usize]) -> DenseMatrix {
    let d = b.rows();
    let mut out = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if b[(i, j)] != 0.0 {
                out[(perm[i], perm[j])] = b[(i, j)];
            }
        }
    }
    out
}

/// Erdős–Rényi DAG: every pair consistent with a random node order is an
/// edge with probability `2k / (d - 1)`.
pub fn gen_er(spec: &GraphSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    if spec.scheme != GraphScheme::Er {
        return arg_err("gen_er called with a non-ER spec");
    }
    gen_er_with(spec, &mut Rng::new(spec.seed))
}

fn gen_er_with(spec: &GraphSpec, rng: &mut Rng) -> Result<DenseMatrix> {
    let d = spec.d;
    let prob = 2.0 * spec.k / (d - 1) as f64;
    let perm = rng.permutation(d);
    let mut b = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in (i + 1)..d {
            if rng.bernoulli(prob) {
                b[(perm[i], perm[j])] = 1.0;
            }
        }
    }
    Ok(b)
}

/// Scale-free DAG by preferential attachment.
///
/// `k` seed nodes start fully connected; each later node links to `k`
/// distinct existing nodes chosen with probability proportional to degree.
/// Edges point from the newer node to the older one, so high-degree hubs
/// collect large in-degree. Node labels are shuffled at the end.
pub fn gen_sf(spec: &GraphSpec) -> Result<DenseMatrix> {
    spec.validate()?;
    if spec.scheme != GraphScheme::Sf {
        return arg_err("gen_sf called with a non-SF spec");
    }
    gen_sf_with(spec, &mut Rng::new(spec.seed))
}

fn gen_sf_with(spec: &GraphSpec, rng: &mut Rng) -> Result<DenseMatrix> {
    let d = spec.d;
    let k = spec.k as usize;
    let mut b = DenseMatrix::zeros(d, d);
    let mut degree = vec![0usize; d];
    for j in 0..k {
        for i in 0..j {
            b[(j, i)] = 1.0;
            degree[i] += 1;
            degree[j] += 1;
        }
    }
    for v in k..d {
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        for _ in 0..k {
            let candidates: Vec<usize> = (0..v).filter(|u| !chosen.contains(u)).collect();
            let total: usize = candidates.iter().map(|&u| degree[u]).sum();
            let pick = if total == 0 {
                candidates[rng.index(candidates.len())]
            } else {
                let mut target = rng.unit() * total as f64;
                let mut pick = *candidates.last().expect("v >= k >= 1");
                for &u in &candidates {
                    target -= degree[u] as f64;
                    if target < 0.0 {
                        pick = u;
                        break;
                    }
                }
                pick
            };
            chosen.push(pick);
        }
        for &u in &chosen {
            b[(v, u)] = 1.0;
            degree[u] += 1;
            degree[v] += 1;
        }
    }
    let perm = rng.permutation(d);
    Ok(relabel(&b, &perm))
}

pub fn gen_graph(spec: &GraphSpec) -> Result<DenseMatrix> {
    match spec.scheme {
        GraphScheme::Er => gen_er(spec),
        GraphScheme::Sf => gen_sf(spec),
    }
}

/// Replaces each edge with a weight uniform on `[-2, -0.5] ∪ [0.5, 2]`.
pub fn assign_weights(b: &DenseMatrix, rng: &mut Rng) -> Result<DenseMatrix> {
    if !b.is_square() || !is_dag(b) {
        return Err(Error::Cyclic("edge weights can only be assigned to a DAG".into()));
    }
    let mut a = b.clone();
    for v in a.as_mut_slice() {
        if *v != 0.0 {
            let sign = if rng.bernoulli(0.5) { -1.0 } else { 1.0 };
            *v = sign * rng.uniform(0.5, 2.0);
        }
    }
    Ok(a)
}

fn topo_order(a0: &DenseMatrix) -> Result<Vec<usize>> {
    match topological_sort(a0)? {
        TopoOrder::Order(o) => Ok(o),
        TopoOrder::Cycle(_) => Err(Error::Cyclic("SEM sampling needs an acyclic graph".into())),
    }
}

/// Solves `X_j = sum_i a0(i,j) X_i + Z_j` in topological order, row by row.
fn propagate(a0: &DenseMatrix, noise: &DenseMatrix, order: &[usize]) -> DenseMatrix {
    let (n, d) = (noise.rows(), noise.cols());
    let mut x = DenseMatrix::zeros(n, d);
    for s in 0..n {
        for &j in order {
            let mut v = noise[(s, j)];
            for i in 0..d {
                let w = a0[(i, j)];
                if w != 0.0 {
                    v += w * x[(s, i)];
                }
            }
            x[(s, j)] = v;
        }
    }
    x
}

/// `n` samples from the linear SEM `X = a0^T X + Z` with standard noise.
/// `NoiseKind::None` gives the all-zero dataset.
pub fn sample_linear_sem(a0: &DenseMatrix, n: usize, noise: NoiseKind, rng: &mut Rng) -> Result<Dataset> {
    if n == 0 {
        return arg_err("sample count must be positive");
    }
    let order = topo_order(a0)?;
    let d = a0.rows();
    let z = DenseMatrix::from_fn(n, d, |_, _| match noise {
        NoiseKind::Gaussian => rng.standard_normal(),
        NoiseKind::Gumbel => rng.gumbel(0.0, 1.0),
        NoiseKind::None => 0.0,
    });
    Dataset::new(propagate(a0, &z, &order))
}

/// Linear-SEM samples free of sampling error: the Gaussian noise matrix is
/// centred and whitened so its sample covariance is exactly the identity,
/// then independent `N(0, jitter^2)` perturbations are added to the data.
///
/// On such data ordinary least squares in the true order returns the true
/// weights, which makes structure recovery checkable exactly.
pub fn sample_linear_sem_exact(a0: &DenseMatrix, n: usize, jitter: f64, rng: &mut Rng) -> Result<Dataset> {
    let d = a0.rows();
    if n <= d {
        return arg_err(format!("whitened sampling needs n > d, got n={n} d={d}"));
    }
    let order = topo_order(a0)?;
    let mut z = DenseMatrix::from_fn(n, d, |_, _| rng.standard_normal());
    for j in 0..d {
        let mean = (0..n).map(|s| z[(s, j)]).sum::<f64>() / n as f64;
        for s in 0..n {
            z[(s, j)] -= mean;
        }
    }
    let cov = z.transpose().matmul(&z)?.scale(1.0 / n as f64);
    let l = cholesky(&cov)?;
    let l_inv = lu_solve(&l, &DenseMatrix::identity(d))?;
    let z = z.matmul(&l_inv.transpose())?;
    let mut x = propagate(a0, &z, &order);
    if jitter > 0.0 {
        for v in x.as_mut_slice() {
            *v += jitter * rng.standard_normal();
        }
    }
    Dataset::new(x)
}

/// A ground-truth weighted DAG together with data sampled from it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub a_true: DenseMatrix,
    pub data: Dataset,
}

/// Graph, weights and samples all drawn from one stream seeded by `spec.seed`.
pub fn simulate(spec: &GraphSpec, n: usize, noise: NoiseKind) -> Result<Simulation> {
    spec.validate()?;
    let mut rng = Rng::new(spec.seed);
    let b = match spec.scheme {
        GraphScheme::Er => gen_er_with(spec, &mut rng)?,
        GraphScheme::Sf => gen_sf_with(spec, &mut rng)?,
    };
    let a_true = assign_weights(&b, &mut rng)?;
    let data = sample_linear_sem(&a_true, n, noise, &mut rng)?;
    Ok(Simulation { a_true, data })
}
