//! Tensor fields on charts: Lie derivatives of tensors and connections,
//! curvature and torsion, and complete lifts to the tangent and frame
//! bundles.
//!
//! All derived objects are evaluated pointwise through the jet kernel; no
//! symbolic differentiation happens anywhere. Index conventions follow
//! `Gamma^a_{bc} = dx^a(nabla_{d_c} d_b)`: the second lower index of a
//! connection is the derivative index. Curvature and torsion sign
//! conventions:
//!
//! ```text
//! R^a_{bcd} = d_c Gamma^a_{bd} - d_d Gamma^a_{bc}
//!           + Gamma^a_{ec} Gamma^e_{bd} - Gamma^a_{ed} Gamma^e_{bc}
//! T^a_{bc}  = Gamma^a_{cb} - Gamma^a_{bc}
//! ```

use crate::chart::{Chart, JetContext};
use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::jet::Jet;
use ndarray::{ArrayD, IxDyn};
use std::sync::Arc;

/// Visit every multi-index of the given rank with entries `0..dim`.
pub fn for_each_index(dim: usize, rank: usize, mut f: impl FnMut(&[usize])) {
    let mut idx = vec![0usize; rank];
    loop {
        f(&idx);
        let mut k = rank;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dim {
                break;
            }
            idx[k] = 0;
        }
        if rank == 0 {
            return;
        }
    }
}

/// A tensor field of valence (m, n): m contravariant then n covariant slots,
/// each component an expression over the chart coordinates.
#[derive(Debug, Clone)]
pub struct TensorField {
    pub chart: Arc<Chart>,
    pub m: usize,
    pub n: usize,
    pub comps: ArrayD<ScalarExpr>,
}

impl TensorField {
    pub fn new(chart: Arc<Chart>, m: usize, n: usize, comps: ArrayD<ScalarExpr>) -> Result<TensorField> {
        let dim = chart.dim();
        let expected: Vec<usize> = vec![dim; m + n];
        if comps.shape() != expected.as_slice() {
            return Err(GeomError::DimensionMismatch(format!(
                "tensor of valence ({m},{n}) on a dim-{dim} chart needs shape {expected:?}, got {:?}",
                comps.shape()
            )));
        }
        Ok(TensorField { chart, m, n, comps })
    }

    pub fn rank(&self) -> usize {
        self.m + self.n
    }

    /// Component jets at a point context.
    pub fn eval_jets(&self, ctx: &JetContext) -> Result<ArrayD<Jet>> {
        let mut out = Vec::with_capacity(self.comps.len());
        for e in self.comps.iter() {
            out.push(ctx.eval(e)?);
        }
        Ok(ArrayD::from_shape_vec(self.comps.raw_dim(), out).expect("shape preserved"))
    }

    /// Component values at a point context.
    pub fn eval_values(&self, ctx: &JetContext) -> Result<ArrayD<f64>> {
        let mut out = Vec::with_capacity(self.comps.len());
        for e in self.comps.iter() {
            out.push(ctx.eval(e)?.value());
        }
        Ok(ArrayD::from_shape_vec(self.comps.raw_dim(), out).expect("shape preserved"))
    }
}

/// A vector field: dim expression components over its chart.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub chart: Arc<Chart>,
    pub comps: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, comps: Vec<ScalarExpr>) -> Result<VectorField> {
        if comps.len() != chart.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "vector field has {} components on a dim-{} chart",
                comps.len(),
                chart.dim()
            )));
        }
        Ok(VectorField { chart, comps })
    }

    pub fn eval_jets(&self, ctx: &JetContext) -> Result<Vec<Jet>> {
        self.comps.iter().map(|e| ctx.eval(e)).collect()
    }

    pub fn eval_values(&self, ctx: &JetContext) -> Result<Vec<f64>> {
        self.comps
            .iter()
            .map(|e| ctx.eval(e).map(|j| j.value()))
            .collect()
    }

    /// Complete lift to the tangent bundle: the fiber components are
    /// `y^b d_b xi^a`, produced as a jet evaluator over the extended chart.
    pub fn tangent_lift(&self, tm_chart: Arc<Chart>) -> LiftedField {
        LiftedField { base: self.clone(), chart: tm_chart, kind: LiftKind::Tangent }
    }

    /// Complete lift to the frame bundle: frame components `f_i^b d_b xi^a`.
    pub fn frame_lift(&self, gl_chart: Arc<Chart>) -> LiftedField {
        LiftedField { base: self.clone(), chart: gl_chart, kind: LiftKind::Frame }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LiftKind {
    Tangent,
    Frame,
}

/// Complete lift of a base vector field to an extended chart.
#[derive(Debug, Clone)]
pub struct LiftedField {
    pub base: VectorField,
    pub chart: Arc<Chart>,
    pub kind: LiftKind,
}

impl LiftedField {
    /// Component jets in extended-chart coordinate order (base first).
    ///
    /// The base components are differentiated once, so the result is exact
    /// only to one below the context order.
    pub fn component_jets(&self, ctx: &JetContext) -> Result<Vec<Jet>> {
        let n = self.base.chart.dim();
        let xi_jets = self.base.eval_jets(ctx)?;
        let mut out = Vec::with_capacity(ctx.dim());
        out.extend(xi_jets.iter().cloned());
        match self.kind {
            LiftKind::Tangent => {
                for xi in &xi_jets {
                    let mut acc = ctx.zero();
                    for b in 0..n {
                        acc = acc.add(&ctx.coord_jets[n + b].mul(&xi.derivative(b))?)?;
                    }
                    out.push(acc);
                }
            }
            LiftKind::Frame => {
                // Frame coordinate f_i_a sits at chart slot n + i*n + a and
                // the lift component there is f_i^b d_b xi^a.
                for i in 0..n {
                    for xi in xi_jets.iter().take(n) {
                        let mut acc = ctx.zero();
                        for b in 0..n {
                            acc = acc.add(&ctx.coord_jets[n + i * n + b].mul(&xi.derivative(b))?)?;
                        }
                        out.push(acc);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn component_values(&self, ctx: &JetContext) -> Result<Vec<f64>> {
        Ok(self.component_jets(ctx)?.iter().map(|j| j.value()).collect())
    }
}

/// Connection coefficients as expressions, indexed `[a][b][c]` with `c` the
/// derivative index.
#[derive(Debug, Clone)]
pub struct ConnectionField {
    pub chart: Arc<Chart>,
    pub comps: ArrayD<ScalarExpr>,
}

impl ConnectionField {
    pub fn new(chart: Arc<Chart>, comps: ArrayD<ScalarExpr>) -> Result<ConnectionField> {
        let dim = chart.dim();
        if comps.shape() != [dim, dim, dim] {
            return Err(GeomError::DimensionMismatch(format!(
                "connection on a dim-{dim} chart needs shape [{dim}, {dim}, {dim}], got {:?}",
                comps.shape()
            )));
        }
        Ok(ConnectionField { chart, comps })
    }

    pub fn zero(chart: Arc<Chart>) -> ConnectionField {
        let dim = chart.dim();
        let comps = ArrayD::from_elem(IxDyn(&[dim, dim, dim]), ScalarExpr::num(0.0));
        ConnectionField { chart, comps }
    }
}

/// Anything that can produce connection-coefficient jets at a point context.
///
/// The context may live on an extended (frame) chart; base coordinates always
/// occupy variable slots `0..base_dim`, which is where derivative extraction
/// happens.
pub trait GammaEval {
    fn base_chart(&self) -> &Arc<Chart>;

    /// Jets of `Gamma^a_{bc}`, flattened `a*dim^2 + b*dim + c`.
    fn gamma_jets(&self, ctx: &JetContext) -> Result<Vec<Jet>>;
}

impl GammaEval for ConnectionField {
    fn base_chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    fn gamma_jets(&self, ctx: &JetContext) -> Result<Vec<Jet>> {
        self.comps.iter().map(|e| ctx.eval(e)).collect()
    }
}

fn flat3(dim: usize, a: usize, b: usize, c: usize) -> usize {
    (a * dim + b) * dim + c
}

/// Lie derivative of a tensor field along a vector field at one point:
/// the standard coordinate formula.
pub fn lie_derivative_tensor(
    xi: &VectorField,
    w: &TensorField,
    point: &[f64],
    order: usize,
) -> Result<ArrayD<f64>> {
    if !xi.chart.compatible(&w.chart) {
        return Err(GeomError::ChartMismatch);
    }
    w.chart.check_guard(point)?;
    let ctx = w.chart.jet_context(point, order.max(1))?;
    let xi_jets = xi.eval_jets(&ctx)?;
    let w_jets = w.eval_jets(&ctx)?;
    let dim = w.chart.dim();
    let (m, n) = (w.m, w.n);

    let xi_val: Vec<f64> = xi_jets.iter().map(|j| j.value()).collect();
    let mut dxi = vec![vec![0.0; dim]; dim]; // dxi[c][a] = d_c xi^a
    for (a, j) in xi_jets.iter().enumerate() {
        for (c, row) in dxi.iter_mut().enumerate() {
            row[a] = j.d(c);
        }
    }

    let mut out = ArrayD::zeros(w.comps.raw_dim());
    for_each_index(dim, m + n, |idx| {
        let w_idx = w_jets.get(IxDyn(idx)).expect("index in range");
        // Transport term xi^c d_c W.
        let mut acc = 0.0;
        for c in 0..dim {
            acc += xi_val[c] * w_idx.d(c);
        }
        // Upper slots: - d_c xi^{a_i} W^{..c..}.
        let mut alt = idx.to_vec();
        for slot in 0..m {
            let a_i = idx[slot];
            for c in 0..dim {
                alt[slot] = c;
                acc -= dxi[c][a_i] * w_jets.get(IxDyn(&alt)).expect("in range").value();
            }
            alt[slot] = idx[slot];
        }
        // Lower slots: + d_{b_j} xi^c W_{..c..}.
        for slot in m..m + n {
            let b_j = idx[slot];
            for c in 0..dim {
                alt[slot] = c;
                acc += dxi[b_j][c] * w_jets.get(IxDyn(&alt)).expect("in range").value();
            }
            alt[slot] = idx[slot];
        }
        out[IxDyn(idx)] = acc;
    });
    Ok(out)
}

/// Lie derivative of connection coefficients (the inhomogeneous coordinate
/// formula).
pub fn lie_derivative_connection(
    xi: &VectorField,
    gamma: &dyn GammaEval,
    point: &[f64],
    order: usize,
) -> Result<ArrayD<f64>> {
    if !xi.chart.compatible(gamma.base_chart()) {
        return Err(GeomError::ChartMismatch);
    }
    gamma.base_chart().check_guard(point)?;
    let ctx = gamma.base_chart().jet_context(point, order.max(2))?;
    let g_jets = gamma.gamma_jets(&ctx)?;
    let xi_jets = xi.eval_jets(&ctx)?;
    lie_derivative_connection_values(&ctx, &g_jets, &xi_jets)
}

/// Core of [`lie_derivative_connection`], reusable with derived connections.
pub fn lie_derivative_connection_values(
    ctx: &JetContext,
    gamma_jets: &[Jet],
    xi_jets: &[Jet],
) -> Result<ArrayD<f64>> {
    let dim = xi_jets.len();
    let g_val: Vec<f64> = gamma_jets.iter().map(|j| j.value()).collect();
    let mut out = ArrayD::zeros(IxDyn(&[dim, dim, dim]));
    let mut alpha2 = vec![0u8; ctx.space.n_vars()];
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let g_abc = &gamma_jets[flat3(dim, a, b, c)];
                let mut acc = 0.0;
                for d in 0..dim {
                    acc += xi_jets[d].value() * g_abc.d(d);
                    acc -= xi_jets[a].d(d) * g_val[flat3(dim, d, b, c)];
                    acc += xi_jets[d].d(b) * g_val[flat3(dim, a, d, c)];
                    acc += xi_jets[d].d(c) * g_val[flat3(dim, a, b, d)];
                }
                alpha2.iter_mut().for_each(|e| *e = 0);
                alpha2[b] += 1;
                alpha2[c] += 1;
                acc += xi_jets[a].partial(&alpha2)?;
                out[[a, b, c]] = acc;
            }
        }
    }
    Ok(out)
}

/// The same Lie derivative assembled from covariant derivatives, curvature
/// and torsion. Used to cross-check the coordinate formula; the two routes
/// agree because the result is a tensor.
pub fn lie_derivative_connection_tensorial(
    xi: &VectorField,
    gamma: &dyn GammaEval,
    point: &[f64],
    order: usize,
) -> Result<ArrayD<f64>> {
    if !xi.chart.compatible(gamma.base_chart()) {
        return Err(GeomError::ChartMismatch);
    }
    gamma.base_chart().check_guard(point)?;
    let ctx = gamma.base_chart().jet_context(point, order.max(2))?;
    let g_jets = gamma.gamma_jets(&ctx)?;
    let xi_jets = xi.eval_jets(&ctx)?;
    let dim = xi_jets.len();
    let curv = curvature_values(&ctx, &g_jets)?;
    let g_val: Vec<f64> = g_jets.iter().map(|j| j.value()).collect();

    // S^a_b = nabla_b xi^a as jets (exact one order below the context).
    let mut s = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut j = xi_jets[a].derivative(b);
            for d in 0..dim {
                j = j.add(&g_jets[flat3(dim, a, d, b)].mul(&xi_jets[d])?)?;
            }
            s.push(j);
        }
    }
    // U^a_b = xi^d T^a_{bd} as jets.
    let mut u = Vec::with_capacity(dim * dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut j = ctx.zero();
            for d in 0..dim {
                let t_jet = g_jets[flat3(dim, a, d, b)].sub(&g_jets[flat3(dim, a, b, d)])?;
                j = j.add(&t_jet.mul(&xi_jets[d])?)?;
            }
            u.push(j);
        }
    }

    let cov = |field: &[Jet], a: usize, b: usize, c: usize| -> f64 {
        // (nabla_c X)^a_b for a (1,1)-valued jet array.
        let mut acc = field[a * dim + b].d(c);
        for d in 0..dim {
            acc += g_val[flat3(dim, a, d, c)] * field[d * dim + b].value();
            acc -= g_val[flat3(dim, d, b, c)] * field[a * dim + d].value();
        }
        acc
    };

    let mut out = ArrayD::zeros(IxDyn(&[dim, dim, dim]));
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                let mut acc = cov(&s, a, b, c) - cov(&u, a, b, c);
                for d in 0..dim {
                    acc -= xi_jets[d].value() * curv[[a, b, c, d]];
                }
                out[[a, b, c]] = acc;
            }
        }
    }
    Ok(out)
}

/// Riemann curvature of a connection at one point.
pub fn curvature(gamma: &dyn GammaEval, point: &[f64], order: usize) -> Result<ArrayD<f64>> {
    gamma.base_chart().check_guard(point)?;
    let ctx = gamma.base_chart().jet_context(point, order.max(1))?;
    let g_jets = gamma.gamma_jets(&ctx)?;
    curvature_values(&ctx, &g_jets)
}

pub fn curvature_values(_ctx: &JetContext, gamma_jets: &[Jet]) -> Result<ArrayD<f64>> {
    let dim3 = gamma_jets.len();
    let dim = (0..=dim3).find(|k| k * k * k == dim3).ok_or_else(|| {
        GeomError::DimensionMismatch("gamma jet array is not a cube".into())
    })?;
    let g_val: Vec<f64> = gamma_jets.iter().map(|j| j.value()).collect();
    let mut out = ArrayD::zeros(IxDyn(&[dim, dim, dim, dim]));
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                for d in 0..dim {
                    let mut acc = gamma_jets[flat3(dim, a, b, d)].d(c)
                        - gamma_jets[flat3(dim, a, b, c)].d(d);
                    for e in 0..dim {
                        acc += g_val[flat3(dim, a, e, c)] * g_val[flat3(dim, e, b, d)]
                            - g_val[flat3(dim, a, e, d)] * g_val[flat3(dim, e, b, c)];
                    }
                    out[[a, b, c, d]] = acc;
                }
            }
        }
    }
    Ok(out)
}

/// Torsion of a connection at one point.
pub fn torsion(gamma: &dyn GammaEval, point: &[f64], order: usize) -> Result<ArrayD<f64>> {
    gamma.base_chart().check_guard(point)?;
    let ctx = gamma.base_chart().jet_context(point, order.max(1))?;
    let g_jets = gamma.gamma_jets(&ctx)?;
    let dim = gamma.base_chart().dim();
    Ok(torsion_values(&g_jets, dim))
}

pub fn torsion_values(gamma_jets: &[Jet], dim: usize) -> ArrayD<f64> {
    let mut out = ArrayD::zeros(IxDyn(&[dim, dim, dim]));
    for a in 0..dim {
        for b in 0..dim {
            for c in 0..dim {
                out[[a, b, c]] = gamma_jets[flat3(dim, a, c, b)].value()
                    - gamma_jets[flat3(dim, a, b, c)].value();
            }
        }
    }
    out
}

/// Lie derivative of a one-form with jet-evaluated components along a vector
/// field with jet-evaluated components, on any chart:
/// `(L_v omega)_A = v^B d_B omega_A + d_A v^B omega_B`.
pub fn lie_oneform_values(v_jets: &[Jet], omega_jets: &[Jet]) -> Vec<f64> {
    let dim = v_jets.len();
    let mut out = vec![0.0; dim];
    for (a, slot) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for b in 0..dim {
            acc += v_jets[b].value() * omega_jets[a].d(b);
            acc += v_jets[b].d(a) * omega_jets[b].value();
        }
        *slot = acc;
    }
    out
}

/// Expression-backed wrapper over [`lie_oneform_values`].
pub fn lie_derivative_oneform(
    v: &VectorField,
    omega_comps: &[ScalarExpr],
    point: &[f64],
    order: usize,
) -> Result<Vec<f64>> {
    if omega_comps.len() != v.chart.dim() {
        return Err(GeomError::DimensionMismatch(format!(
            "one-form has {} components on a dim-{} chart",
            omega_comps.len(),
            v.chart.dim()
        )));
    }
    v.chart.check_guard(point)?;
    let ctx = v.chart.jet_context(point, order.max(1))?;
    let v_jets = v.eval_jets(&ctx)?;
    let omega_jets: Vec<Jet> = omega_comps
        .iter()
        .map(|e| ctx.eval(e))
        .collect::<Result<_>>()?;
    Ok(lie_oneform_values(&v_jets, &omega_jets))
}
