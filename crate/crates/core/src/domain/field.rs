use serde::{Deserialize, Serialize};

use super::expr::{parse_expr, CompiledExpr, EvalError, Expr};
use super::grid::{GridSpec, GRID_SNAP_TOL};
use super::interval::{Interval, IntervalError};
use super::DomainError;
use crate::simplicial::{Point, Vector};

/// An axis-aligned closed box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub lo: Point,
    pub hi: Point,
}

impl BoxRegion {
    pub fn new(lo: Point, hi: Point) -> Self {
        Self { lo, hi }
    }

    /// The box grown by `r` on every side.
    pub fn inflate(&self, r: f64) -> Self {
        let mut b = *self;
        for d in 0..self.lo.dim() {
            b.lo[d] -= r;
            b.hi[d] += r;
        }
        b
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..p.dim()).all(|d| self.lo[d] <= p[d] && p[d] <= self.hi[d])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzMethod {
    SymbolicInterval,
    SampledFallback,
}

/// An upper bound on the Lipschitz constant (Euclidean norms) over a box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzBound {
    pub value: f64,
    pub region: BoxRegion,
    pub method: LipschitzMethod,
}

impl LipschitzBound {
    pub fn is_certified(&self) -> bool {
        self.method == LipschitzMethod::SymbolicInterval
    }
}

/// Samples of an R^n-valued map at the nodes of a grid, interpolated
/// componentwise multilinearly.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    /// Node values, nodes in row-major order (last axis fastest), the n
    /// components of each node contiguous.
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, DomainError> {
        grid.validate()?;
        let nodes: usize = grid.shape.iter().map(|e| e + 1).product();
        if values.len() != nodes * grid.n {
            return Err(DomainError::Invalid(format!(
                "expected {} sample values, found {}",
                nodes * grid.n,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(DomainError::Invalid("sample values must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    fn node_offset(&self, idx: &[usize; 3]) -> usize {
        let n = self.grid.n;
        let mut lin = 0usize;
        for d in 0..n {
            lin = lin * (self.grid.shape[d] + 1) + idx[d];
        }
        lin * n
    }

    pub fn region(&self) -> BoxRegion {
        let g = &self.grid;
        let lo = g.origin_point();
        let mut hi = lo;
        for d in 0..g.n {
            hi[d] += g.shape[d] as f64 * g.spacing;
        }
        BoxRegion::new(lo, hi)
    }

    pub fn eval(&self, p: &Point) -> Result<Vector, EvalError> {
        let g = &self.grid;
        let n = g.n;
        let u = g.to_grid(p);
        let mut base = [0usize; 3];
        let mut t = [0.0; 3];
        for d in 0..n {
            let e = g.shape[d] as f64;
            let tol = GRID_SNAP_TOL * (1.0 + e);
            if !(u[d] >= -tol && u[d] <= e + tol) {
                return Err(EvalError::OutOfBox);
            }
            let x = u[d].clamp(0.0, e);
            let b = (x.floor() as usize).min(g.shape[d] - 1);
            base[d] = b;
            t[d] = x - b as f64;
        }
        let mut out = [0.0; 3];
        for corner in 0u32..(1 << n) {
            let mut w = 1.0;
            let mut idx = base;
            for d in 0..n {
                if corner & (1 << d) != 0 {
                    idx[d] += 1;
                    w *= t[d];
                } else {
                    w *= 1.0 - t[d];
                }
            }
            if w == 0.0 {
                continue;
            }
            let off = self.node_offset(&idx);
            for (c, o) in out[..n].iter_mut().enumerate() {
                *o += w * self.values[off + c];
            }
        }
        Ok(Point::from_slice_unchecked(&out[..n]))
    }

    /// Largest difference quotient `|v_i(node + e_j) - v_i(node)| / spacing`
    /// per component i and axis j, over grid edges meeting `region`.
    fn difference_quotients(&self, region: &BoxRegion) -> [[f64; 3]; 3] {
        let g = &self.grid;
        let n = g.n;
        let mut q = [[0.0f64; 3]; 3];
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        let ulo = g.to_grid(&region.lo);
        let uhi = g.to_grid(&region.hi);
        for d in 0..n {
            lo[d] = (ulo[d].floor().max(0.0) as usize).min(g.shape[d]);
            hi[d] = (uhi[d].ceil().max(0.0) as usize).min(g.shape[d]);
        }
        let mut idx = lo;
        loop {
            let here = self.node_offset(&idx);
            for j in 0..n {
                if idx[j] < hi[j] {
                    let mut nb = idx;
                    nb[j] += 1;
                    let there = self.node_offset(&nb);
                    for (i, row) in q[..n].iter_mut().enumerate() {
                        let dq = (self.values[there + i] - self.values[here + i]).abs() / g.spacing;
                        row[j] = row[j].max(dq);
                    }
                }
            }
            let mut d = 0;
            loop {
                if d == n {
                    return q;
                }
                idx[d] += 1;
                if idx[d] <= hi[d] {
                    break;
                }
                idx[d] = lo[d];
                d += 1;
            }
        }
    }
}

#[derive(Clone, Debug)]
struct ExprField {
    sources: Vec<String>,
    exprs: Vec<Expr>,
    compiled: Vec<CompiledExpr>,
    /// `partials[i][j]` is the derivative of component i in variable j.
    partials: Vec<Vec<Expr>>,
}

#[derive(Clone, Debug)]
enum Kind {
    Exprs(ExprField),
    Samples(SampledField),
}

/// The input map f: either one expression per component or grid samples.
#[derive(Clone, Debug)]
pub struct FieldSpec {
    n: usize,
    kind: Kind,
}

impl FieldSpec {
    /// Parses one expression per component (the number of components is n).
    pub fn parse(sources: &[String]) -> Result<Self, DomainError> {
        let n = sources.len();
        if !(2..=3).contains(&n) {
            return Err(DomainError::Invalid(format!(
                "expected 2 or 3 components, found {n}"
            )));
        }
        let mut exprs = Vec::with_capacity(n);
        for (i, s) in sources.iter().enumerate() {
            let e = parse_expr(s, n).map_err(|e| DomainError::Parse {
                component: i,
                error: e,
            })?;
            exprs.push(e);
        }
        let compiled = exprs.iter().map(CompiledExpr::new).collect();
        let partials = exprs
            .iter()
            .map(|e| (0..n).map(|j| e.derivative(j)).collect())
            .collect();
        Ok(Self {
            n,
            kind: Kind::Exprs(ExprField {
                sources: sources.to_vec(),
                exprs,
                compiled,
                partials,
            }),
        })
    }

    pub fn sampled(s: SampledField) -> Self {
        Self {
            n: s.grid.n,
            kind: Kind::Samples(s),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sources(&self) -> Option<&[String]> {
        match &self.kind {
            Kind::Exprs(e) => Some(&e.sources),
            Kind::Samples(_) => None,
        }
    }

    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.kind {
            Kind::Exprs(e) => Some(&e.exprs),
            Kind::Samples(_) => None,
        }
    }

    pub fn samples(&self) -> Option<&SampledField> {
        match &self.kind {
            Kind::Samples(s) => Some(s),
            Kind::Exprs(_) => None,
        }
    }

    /// Region where the field can be evaluated (`None` means everywhere,
    /// subject to the expression's own domain).
    pub fn region(&self) -> Option<BoxRegion> {
        self.samples().map(SampledField::region)
    }

    #[inline]
    pub fn eval(&self, p: &Point) -> Result<Vector, EvalError> {
        match &self.kind {
            Kind::Exprs(e) => {
                let mut out = [0.0; 3];
                for (o, c) in out.iter_mut().zip(&e.compiled) {
                    *o = c.eval(p.coords())?;
                }
                Ok(Point::from_slice_unchecked(&out[..self.n]))
            }
            Kind::Samples(s) => s.eval(p),
        }
    }

    /// Upper bound on the Lipschitz constant of f over `region`.
    ///
    /// For expressions: with `S_ij` an interval bound of `sup |∂f_i/∂x_j|`
    /// over the box, the Frobenius norm `sqrt(Σ S_ij²)` bounds the operator
    /// norm of every Jacobian in the box. For samples: the same norm of the
    /// largest difference quotients (exact for the multilinear interpolant),
    /// doubled as a safety margin and flagged as not certified.
    pub fn lipschitz_bound(&self, region: &BoxRegion) -> Result<LipschitzBound, DomainError> {
        let n = self.n;
        match &self.kind {
            Kind::Exprs(e) => {
                let boxes: Vec<Interval> = (0..n)
                    .map(|d| Interval::new(region.lo[d], region.hi[d]))
                    .collect();
                let mut sum = 0.0;
                for (i, row) in e.partials.iter().enumerate() {
                    for (j, partial) in row.iter().enumerate() {
                        let iv = partial.eval_interval(&boxes).map_err(|err| {
                            DomainError::Lipschitz {
                                component: i,
                                variable: j,
                                error: err,
                            }
                        })?;
                        if !iv.is_bounded() {
                            return Err(DomainError::Lipschitz {
                                component: i,
                                variable: j,
                                error: IntervalError::Unbounded,
                            });
                        }
                        sum += iv.mag() * iv.mag();
                    }
                }
                let value = if sum == 0.0 {
                    0.0
                } else {
                    sum.sqrt().next_up()
                };
                if !value.is_finite() {
                    return Err(DomainError::Lipschitz {
                        component: 0,
                        variable: 0,
                        error: IntervalError::Unbounded,
                    });
                }
                Ok(LipschitzBound {
                    value,
                    region: *region,
                    method: LipschitzMethod::SymbolicInterval,
                })
            }
            Kind::Samples(s) => {
                let q = s.difference_quotients(region);
                let sum: f64 = q[..n]
                    .iter()
                    .flat_map(|r| r[..n].iter())
                    .map(|v| v * v)
                    .sum();
                Ok(LipschitzBound {
                    value: 2.0 * sum.sqrt(),
                    region: *region,
                    method: LipschitzMethod::SampledFallback,
                })
            }
        }
    }
}
