//! Splitting a pair of spaces `(V, W)` into matched summands that the
//! operator set respects, via the algebra of intertwining pairs.
//!
//! All the work happens on coordinate matrices. [`decompose`] wraps the
//! coordinate result back into oracles for the learner.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{roots_in_field, Field, Matrix};
use crate::blackbox::{express_in_basis, BlackBox, Combination, DiffOp, DiffOps, Project, SpanBasis};
use crate::error::{Error, Result};
use crate::multipoly::{monomial_enumeration, LinearTuple, Monomial, MonomialKind};

/// Eigenvalue draws before giving up on a split.
pub const SPLIT_RETRIES: usize = 8;

/// Linear maps `V -> W` given as `codomain_dim x domain_dim` matrices.
#[derive(Clone, Debug)]
pub struct OperatorSet<F: Field> {
    pub ops: Vec<Matrix<F>>,
    pub domain_dim: usize,
    pub codomain_dim: usize,
    /// The derivative each matrix came from, when it came from one.
    pub tags: Vec<Option<Monomial>>,
}

impl<F: Field> OperatorSet<F> {
    pub fn new(ops: Vec<Matrix<F>>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::InvalidInput("empty operator set".into()))?;
        let (r, s) = (first.rows(), first.cols());
        if ops.iter().any(|k| k.rows() != r || k.cols() != s) {
            return Err(Error::DimensionMismatch("operators of different shapes".into()));
        }
        let tags = vec![None; ops.len()];
        Ok(OperatorSet { ops, domain_dim: s, codomain_dim: r, tags })
    }

    pub fn field(&self) -> &F {
        self.ops[0].field()
    }
}

/// All pairs `(D, E)` with `K D = E K` for every operator `K`.
#[derive(Clone, Debug)]
pub struct AdjointAlgebra<F: Field> {
    pub pair_basis: Vec<(Matrix<F>, Matrix<F>)>,
    /// A basis of the `D` parts.
    pub first_component_basis: Vec<Matrix<F>>,
}

/// Output of [`split_simultaneous`].
#[derive(Clone, Debug)]
pub struct Split<F: Field> {
    pub eigenvalues: Vec<F::Elem>,
    /// Columns are eigenvectors of the sampled element, in eigenvalue order.
    pub eigenvectors: Matrix<F>,
    /// `A` with `A D A^-1` diagonal; the inverse of `eigenvectors`.
    pub basis_change: Matrix<F>,
    pub sampled: Matrix<F>,
}

/// One summand in coordinates: a vector of `V` and a subspace of `W`.
#[derive(Clone, Debug)]
pub struct CoordComponent<F: Field> {
    pub v_coords: Vec<F::Elem>,
    /// Columns span the `W` part.
    pub w_basis: Matrix<F>,
}

#[derive(Clone)]
pub struct Component<F: Field> {
    /// Width-one oracle for the `V` generator of this summand.
    pub v: BlackBox<F>,
    pub v_coords: Vec<F::Elem>,
    pub w_basis: Matrix<F>,
}

/// Summands are determined only up to order and scaling; nothing here is
/// normalized beyond that.
#[derive(Clone)]
pub struct Decomposition<F: Field> {
    pub components: Vec<Component<F>>,
    pub split: Split<F>,
    pub up_to_permutation_and_scaling: bool,
}

/// Matrices of `g -> pi_P(d^alpha g)` for all `|alpha| = k`, in the given bases.
pub fn operator_matrices<F: Field, R: Rng + ?Sized>(
    v_basis: &SpanBasis<F>,
    w_basis: &SpanBasis<F>,
    p: &LinearTuple<F>,
    k: usize,
    rng: &mut R,
) -> Result<OperatorSet<F>> {
    let (family, alphas) = operator_family(v_basis, p, k)?;
    operator_matrices_from(&family, alphas, v_basis.dim(), w_basis, rng)
}

/// The oracle whose output `o * s + j` is `pi_P(d^alpha_o g_j)`, with the
/// multi-indices in enumeration order.
pub fn operator_family<F: Field>(
    v_basis: &SpanBasis<F>,
    p: &LinearTuple<F>,
    k: usize,
) -> Result<(BlackBox<F>, Vec<Monomial>)> {
    let alphas = monomial_enumeration(v_basis.elements.nvars(), k, MonomialKind::All);
    let ops: Vec<DiffOp<F>> = alphas.iter().cloned().map(DiffOp::Partial).collect();
    let family: BlackBox<F> = Arc::new(Project::new(Arc::new(DiffOps::new(v_basis.elements.clone(), ops)), p.clone())?);
    Ok((family, alphas))
}

/// Splits the `W` coordinates of an operator family into one matrix per operator.
pub fn operator_matrices_from<F: Field, R: Rng + ?Sized>(
    family: &BlackBox<F>,
    alphas: Vec<Monomial>,
    s: usize,
    w_basis: &SpanBasis<F>,
    rng: &mut R,
) -> Result<OperatorSet<F>> {
    let coords = express_in_basis(family, w_basis, rng)?.ok_or(Error::NotInSpan)?;
    let r = w_basis.dim();
    let mats = (0..alphas.len()).map(|o| coords.submatrix(0, r, o * s, (o + 1) * s)).collect();
    let mut set = OperatorSet::new(mats)?;
    set.tags = alphas.into_iter().map(Some).collect();
    Ok(set)
}

/// Solves `K D = E K` over the `s^2 + r^2` entries of `(D, E)`.
pub fn adjoint_basis<F: Field>(ops: &OperatorSet<F>) -> AdjointAlgebra<F> {
    let f = ops.field();
    let (s, r) = (ops.domain_dim, ops.codomain_dim);
    let unknowns = s * s + r * r;
    let d_var = |l: usize, b: usize| l * s + b;
    let e_var = |a: usize, c: usize| s * s + a * r + c;
    let mut system = Matrix::zeros(f, 0, unknowns);
    for k in &ops.ops {
        for a in 0..r {
            for b in 0..s {
                let mut row = vec![f.zero(); unknowns];
                for l in 0..s {
                    row[d_var(l, b)] = f.add(&row[d_var(l, b)], k.get(a, l));
                }
                for c in 0..r {
                    row[e_var(a, c)] = f.sub(&row[e_var(a, c)], k.get(c, b));
                }
                system.push_row(row).expect("row width is fixed");
            }
        }
    }
    let kernel = system.kernel();
    let unpack = |v: &[F::Elem]| {
        let d = Matrix::from_rows(f, (0..s).map(|l| v[l * s..(l + 1) * s].to_vec()).collect()).expect("square");
        let e = Matrix::from_rows(f, (0..r).map(|a| v[s * s + a * r..s * s + (a + 1) * r].to_vec()).collect())
            .expect("square");
        (d, e)
    };
    let pair_basis: Vec<_> = kernel.iter().map(|v| unpack(v)).collect();
    let d_rows: Vec<Vec<F::Elem>> = kernel.iter().map(|v| v[..s * s].to_vec()).collect();
    let first_component_basis = if d_rows.is_empty() {
        Vec::new()
    } else {
        let ech = Matrix::from_rows(f, d_rows).expect("equal widths").rref();
        (0..ech.pivots.len())
            .map(|i| {
                let row = ech.matrix.row(i);
                Matrix::from_rows(f, (0..s).map(|l| row[l * s..(l + 1) * s].to_vec()).collect()).expect("square")
            })
            .collect()
    };
    AdjointAlgebra { pair_basis, first_component_basis }
}

/// Diagonalizes a random element of the first component.
///
/// `expected` is the number of summands; a first component of any other
/// dimension is reported as degenerate.
pub fn split_simultaneous<F: Field, R: Rng + ?Sized>(
    adj: &AdjointAlgebra<F>,
    expected: usize,
    rng: &mut R,
) -> Result<Split<F>> {
    let dim = adj.first_component_basis.len();
    if dim != expected {
        return Err(Error::degenerate(2, dim, expected, "dimension of the adjoint first component"));
    }
    let f = adj.first_component_basis[0].field().clone();
    let s = adj.first_component_basis[0].rows();
    for _ in 0..SPLIT_RETRIES {
        let mut d = Matrix::zeros(&f, s, s);
        for b in &adj.first_component_basis {
            d = d.add(&b.scale(&f.random(rng)))?;
        }
        if let Some(split) = diagonalize(&d, rng)? {
            return Ok(split);
        }
    }
    Err(Error::RetryExhausted(format!(
        "no element with {s} distinct eigenvalues in the field after {SPLIT_RETRIES} draws"
    )))
}

/// Eigen-decomposition of `d` when it has `s` distinct eigenvalues in the field.
fn diagonalize<F: Field, R: Rng + ?Sized>(d: &Matrix<F>, rng: &mut R) -> Result<Option<Split<F>>> {
    let f = d.field().clone();
    let s = d.rows();
    let mut roots = roots_in_field(&d.char_poly()?, rng)?;
    let before = roots.len();
    roots.dedup();
    if roots.len() != s || before != s {
        return Ok(None);
    }
    let mut vecs = Vec::with_capacity(s);
    for lambda in &roots {
        let shifted = d.sub(&Matrix::identity(&f, s).scale(lambda))?;
        let mut ker = shifted.kernel();
        if ker.len() != 1 {
            return Ok(None);
        }
        vecs.push(ker.pop().expect("one vector"));
    }
    let eigenvectors = Matrix::from_cols(&f, s, &vecs)?;
    let basis_change = eigenvectors.inverse()?;
    Ok(Some(Split { eigenvalues: roots, eigenvectors, basis_change, sampled: d.clone() }))
}

/// Coordinate form of [`decompose`]: one `V` vector per eigenvalue, with the
/// `W` part spanned by the operator images of that vector.
pub fn decompose_coords<F: Field, R: Rng + ?Sized>(
    ops: &OperatorSet<F>,
    rng: &mut R,
) -> Result<(Split<F>, Vec<CoordComponent<F>>)> {
    let f = ops.field().clone();
    let adj = adjoint_basis(ops);
    let split = split_simultaneous(&adj, ops.domain_dim, rng)?;
    let comps = (0..ops.domain_dim)
        .map(|i| {
            let x = split.eigenvectors.col(i);
            let images: Vec<Vec<F::Elem>> = ops.ops.iter().map(|k| k.mul_vec(&x).expect("shape")).collect();
            let w_basis = column_space(&f, ops.codomain_dim, &images);
            CoordComponent { v_coords: x, w_basis }
        })
        .collect();
    Ok((split, comps))
}

/// Independent columns spanning the given vectors.
fn column_space<F: Field>(f: &F, dim: usize, vecs: &[Vec<F::Elem>]) -> Matrix<F> {
    if vecs.is_empty() {
        return Matrix::zeros(f, dim, 0);
    }
    let ech = Matrix::from_rows(f, vecs.to_vec()).expect("equal widths").rref();
    let cols: Vec<Vec<F::Elem>> = (0..ech.pivots.len()).map(|i| ech.matrix.row(i).to_vec()).collect();
    Matrix::from_cols(f, dim, &cols).expect("column length")
}

/// Splits `V` into one-dimensional summands `(g_1 ... g_s) A^-1`.
pub fn decompose<F: Field, R: Rng + ?Sized>(
    v_basis: &SpanBasis<F>,
    w_basis: &SpanBasis<F>,
    ops: &OperatorSet<F>,
    rng: &mut R,
) -> Result<Decomposition<F>> {
    if ops.domain_dim != v_basis.dim() || ops.codomain_dim != w_basis.dim() {
        return Err(Error::DimensionMismatch("operator shapes disagree with the bases".into()));
    }
    let f = ops.field().clone();
    let (split, coords) = decompose_coords(ops, rng)?;
    let components = coords
        .into_iter()
        .map(|c| {
            let m = Matrix::from_rows(&f, vec![c.v_coords.clone()])?;
            let v: BlackBox<F> = Arc::new(Combination::new(v_basis.elements.clone(), m)?);
            Ok(Component { v, v_coords: c.v_coords, w_basis: c.w_basis })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Decomposition { components, split, up_to_permutation_and_scaling: true })
}

// ---------------------------------------------------------------------------
// Several spaces joined by maps, reduced to one space with endomorphisms.

#[derive(Clone, Debug)]
pub struct VsdEdge<F: Field> {
    pub from: usize,
    pub to: usize,
    /// Each map is `dims[to] x dims[from]`.
    pub maps: Vec<Matrix<F>>,
}

#[derive(Clone, Debug)]
pub struct VsdGraph<F: Field> {
    pub dims: Vec<usize>,
    pub edges: Vec<VsdEdge<F>>,
}

/// The direct sum of all vertex spaces with its block projectors and the
/// edge maps extended by zero.
#[derive(Clone, Debug)]
pub struct ReducedInstance<F: Field> {
    pub total_dim: usize,
    pub offsets: Vec<usize>,
    pub projectors: Vec<Matrix<F>>,
    pub extended: Vec<Matrix<F>>,
}

impl<F: Field> ReducedInstance<F> {
    /// Projectors followed by extended maps.
    pub fn operators(&self) -> Vec<Matrix<F>> {
        self.projectors.iter().chain(&self.extended).cloned().collect()
    }

    /// Block `v` of a vector in the direct sum.
    pub fn block(&self, v: usize, x: &[F::Elem]) -> Vec<F::Elem> {
        let end = self.offsets.get(v + 1).copied().unwrap_or(self.total_dim);
        x[self.offsets[v]..end].to_vec()
    }
}

pub fn generalized_vsd_reduce<F: Field>(field: &F, graph: &VsdGraph<F>) -> Result<ReducedInstance<F>> {
    if graph.dims.is_empty() {
        return Err(Error::InvalidInput("graph without vertices".into()));
    }
    let mut offsets = Vec::with_capacity(graph.dims.len());
    let mut total = 0;
    for &d in &graph.dims {
        offsets.push(total);
        total += d;
    }
    let projectors = graph
        .dims
        .iter()
        .zip(&offsets)
        .map(|(&d, &o)| {
            let mut p = Matrix::zeros(field, total, total);
            for i in o..o + d {
                p.set(i, i, field.one());
            }
            p
        })
        .collect();
    let mut extended = Vec::new();
    for e in &graph.edges {
        if e.from >= graph.dims.len() || e.to >= graph.dims.len() {
            return Err(Error::InvalidInput(format!("edge {} -> {} leaves the graph", e.from, e.to)));
        }
        for m in &e.maps {
            if m.rows() != graph.dims[e.to] || m.cols() != graph.dims[e.from] {
                return Err(Error::DimensionMismatch(format!(
                    "map on edge {} -> {} is {}x{}",
                    e.from,
                    e.to,
                    m.rows(),
                    m.cols()
                )));
            }
            let mut big = Matrix::zeros(field, total, total);
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    big.set(offsets[e.to] + i, offsets[e.from] + j, m.get(i, j).clone());
                }
            }
            extended.push(big);
        }
    }
    Ok(ReducedInstance { total_dim: total, offsets, projectors, extended })
}

/// Endomorphisms commuting with every operator.
pub fn commutant<F: Field>(field: &F, ops: &[Matrix<F>], n: usize) -> Vec<Matrix<F>> {
    let var = |i: usize, j: usize| i * n + j;
    let mut system = Matrix::zeros(field, 0, n * n);
    for a in ops {
        // (A X - X A)[i][j] = sum_l A[i][l] X[l][j] - X[i][l] A[l][j]
        for i in 0..n {
            for j in 0..n {
                let mut row = vec![field.zero(); n * n];
                for l in 0..n {
                    row[var(l, j)] = field.add(&row[var(l, j)], a.get(i, l));
                    row[var(i, l)] = field.sub(&row[var(i, l)], a.get(l, j));
                }
                system.push_row(row).expect("row width is fixed");
            }
        }
    }
    system
        .kernel()
        .into_iter()
        .map(|v| Matrix::from_rows(field, (0..n).map(|i| v[i * n..(i + 1) * n].to_vec()).collect()).expect("square"))
        .collect()
}

/// Splits the direct sum into eigenspaces of a random commuting element and
/// returns, per summand, a basis of each vertex block (as columns).
///
/// Requires the commuting element to be diagonalizable with eigenvalues in
/// the field, which holds when every summand has a one-dimensional commutant.
pub fn decompose_reduced<F: Field, R: Rng + ?Sized>(
    field: &F,
    red: &ReducedInstance<F>,
    rng: &mut R,
) -> Result<Vec<Vec<Matrix<F>>>> {
    let n = red.total_dim;
    let comm = commutant(field, &red.operators(), n);
    for _ in 0..SPLIT_RETRIES {
        let mut x = Matrix::zeros(field, n, n);
        for b in &comm {
            x = x.add(&b.scale(&field.random(rng)))?;
        }
        let mut roots = roots_in_field(&x.char_poly()?, rng)?;
        if roots.len() != n {
            continue;
        }
        roots.dedup();
        let spaces: Vec<Vec<Vec<F::Elem>>> = roots
            .iter()
            .map(|l| x.sub(&Matrix::identity(field, n).scale(l)).expect("square").kernel())
            .collect();
        if spaces.iter().map(Vec::len).sum::<usize>() != n {
            continue;
        }
        return Ok(spaces
            .iter()
            .map(|sp| {
                (0..red.offsets.len())
                    .map(|v| {
                        let blocks: Vec<Vec<F::Elem>> = sp.iter().map(|x| red.block(v, x)).collect();
                        let dim = red.block(v, &vec![field.zero(); n]).len();
                        column_space(field, dim, &blocks)
                    })
                    .collect()
            })
            .collect());
    }
    Err(Error::RetryExhausted("no diagonalizable commuting element found".into()))
}

// ---------------------------------------------------------------------------
// Serialized instances for the command line.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorSetJson {
    pub ops: Vec<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordDecompositionJson {
    pub eigenvalues: Vec<String>,
    pub components: Vec<CoordComponentJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoordComponentJson {
    pub v: Vec<String>,
    /// Columns of the `W` part, each as a list of entries.
    pub w: Vec<Vec<String>>,
}

impl<F: Field> OperatorSet<F> {
    pub fn from_json(field: &F, j: &OperatorSetJson) -> Result<Self> {
        let ops = j
            .ops
            .iter()
            .map(|m| {
                let rows = m
                    .iter()
                    .map(|r| r.iter().map(|x| field.parse(x)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Matrix::from_rows(field, rows)
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorSet::new(ops)
    }

    pub fn to_json(&self) -> OperatorSetJson {
        let f = self.field();
        OperatorSetJson {
            ops: self.ops.iter().map(|m| m.to_rows().iter().map(|r| r.iter().map(|x| f.format(x)).collect()).collect()).collect(),
        }
    }
}

pub fn coords_to_json<F: Field>(field: &F, split: &Split<F>, comps: &[CoordComponent<F>]) -> CoordDecompositionJson {
    CoordDecompositionJson {
        eigenvalues: split.eigenvalues.iter().map(|x| field.format(x)).collect(),
        components: comps
            .iter()
            .map(|c| CoordComponentJson {
                v: c.v_coords.iter().map(|x| field.format(x)).collect(),
                w: (0..c.w_basis.cols()).map(|j| c.w_basis.col(j).iter().map(|x| field.format(x)).collect()).collect(),
            })
            .collect(),
    }
}
