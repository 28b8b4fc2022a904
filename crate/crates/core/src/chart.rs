//! Coordinate charts with sampling boxes and guard predicates.
//!
//! A chart fixes coordinate names, a closed sampling box per coordinate and a
//! list of guard expressions; a point is admissible iff every guard evaluates
//! strictly positive there. Tangent-bundle and frame-bundle charts are plain
//! charts too: base coordinates always come first, fiber coordinates are
//! named `y_<i>`, frame coordinates `f_<i>_<a>` (row `i` = frame label).

use crate::error::{GeomError, Result};
use crate::expr::ScalarExpr;
use crate::jet::{Jet, JetSpace};
use crate::rng::SplitMix64;
use std::collections::HashMap;
use std::sync::Arc;

/// Guard rejection threshold: a sample needs guard > this value.
pub const GUARD_MARGIN: f64 = 1e-9;
/// Consecutive rejections after which sampling reports an infeasible box.
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, Clone)]
pub struct Chart {
    coords: Vec<String>,
    boxes: Vec<(f64, f64)>,
    guards: Vec<ScalarExpr>,
    /// Dimension of the base chart this chart extends (equals `dim()` for a
    /// plain base chart).
    base_dim: usize,
}

impl Chart {
    pub fn new(
        coords: Vec<String>,
        boxes: Vec<(f64, f64)>,
        guards: Vec<ScalarExpr>,
    ) -> Result<Chart> {
        if coords.is_empty() {
            return Err(GeomError::InvalidInput("chart needs at least one coordinate".into()));
        }
        if coords.len() != boxes.len() {
            return Err(GeomError::DimensionMismatch(format!(
                "{} coordinates but {} sampling intervals",
                coords.len(),
                boxes.len()
            )));
        }
        for (i, name) in coords.iter().enumerate() {
            if coords[..i].contains(name) {
                return Err(GeomError::InvalidInput(format!("duplicate coordinate `{name}`")));
            }
        }
        for (name, (lo, hi)) in coords.iter().zip(&boxes) {
            if !(lo <= hi) {
                return Err(GeomError::InvalidInput(format!(
                    "empty sampling interval [{lo}, {hi}] for `{name}`"
                )));
            }
        }
        let base_dim = coords.len();
        Ok(Chart { coords, boxes, guards, base_dim })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Dimension of the underlying base chart (before any extension).
    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn boxes(&self) -> &[(f64, f64)] {
        &self.boxes
    }

    pub fn guards(&self) -> &[ScalarExpr] {
        &self.guards
    }

    /// Same coordinate system (names agree in order).
    pub fn compatible(&self, other: &Chart) -> bool {
        self.coords == other.coords
    }

    /// Extend with tangent-bundle fiber coordinates `y_0 .. y_{n-1}`.
    pub fn tangent_extension(
        &self,
        fiber_boxes: Vec<(f64, f64)>,
        fiber_guard: Option<ScalarExpr>,
    ) -> Result<Chart> {
        let n = self.dim();
        if fiber_boxes.len() != n {
            return Err(GeomError::DimensionMismatch(format!(
                "{} fiber intervals for a dim-{n} chart",
                fiber_boxes.len()
            )));
        }
        let mut coords = self.coords.clone();
        for i in 0..n {
            coords.push(format!("y_{i}"));
        }
        let mut boxes = self.boxes.clone();
        boxes.extend(fiber_boxes);
        let mut guards = self.guards.clone();
        guards.extend(fiber_guard);
        let mut chart = Chart::new(coords, boxes, guards)?;
        chart.base_dim = n;
        Ok(chart)
    }

    /// Extend with frame coordinates `f_<i>_<a>`. Frames are sampled by the
    /// callers (identity-plus-perturbation or orthonormal draws), so the
    /// fiber boxes are placeholders.
    pub fn frame_extension(&self) -> Result<Chart> {
        let n = self.dim();
        let mut coords = self.coords.clone();
        let mut boxes = self.boxes.clone();
        for i in 0..n {
            for a in 0..n {
                coords.push(format!("f_{i}_{a}"));
                boxes.push((-2.0, 2.0));
            }
        }
        let mut chart = Chart::new(coords, boxes, self.guards.clone())?;
        chart.base_dim = n;
        Ok(chart)
    }

    pub fn env_f64(&self, point: &[f64]) -> HashMap<String, f64> {
        self.coords
            .iter()
            .cloned()
            .zip(point.iter().copied())
            .collect()
    }

    /// Smallest guard value at the point (positive means admissible);
    /// `None` when the chart has no guards.
    pub fn guard_value(&self, point: &[f64]) -> Result<Option<f64>> {
        if self.guards.is_empty() {
            return Ok(None);
        }
        let env = self.env_f64(point);
        let mut min = f64::INFINITY;
        for g in &self.guards {
            min = min.min(g.eval_f64(&env)?);
        }
        Ok(Some(min))
    }

    pub fn check_guard(&self, point: &[f64]) -> Result<()> {
        if let Some(v) = self.guard_value(point)? {
            if v <= GUARD_MARGIN {
                return Err(GeomError::GuardViolation { value: v }.at_point(point));
            }
        }
        Ok(())
    }

    /// Draw one admissible point, rejecting guard violations.
    pub fn sample(&self, rng: &mut SplitMix64) -> Result<Vec<f64>> {
        for _ in 0..MAX_REJECTIONS {
            let point: Vec<f64> = self.boxes.iter().map(|&(lo, hi)| rng.uniform(lo, hi)).collect();
            match self.guard_value(&point)? {
                Some(v) if v <= GUARD_MARGIN => continue,
                _ => return Ok(point),
            }
        }
        Err(GeomError::SamplingExhausted { attempts: MAX_REJECTIONS })
    }

    pub fn samples(&self, rng: &mut SplitMix64, count: usize) -> Result<Vec<Vec<f64>>> {
        (0..count).map(|_| self.sample(rng)).collect()
    }

    /// Coordinate jets and a binding environment at a point.
    pub fn jet_context(&self, point: &[f64], order: usize) -> Result<JetContext> {
        if point.len() != self.dim() {
            return Err(GeomError::DimensionMismatch(format!(
                "point has {} coordinates, chart has {}",
                point.len(),
                self.dim()
            )));
        }
        let space = JetSpace::get(self.dim(), order);
        let mut env = HashMap::new();
        let mut coord_jets = Vec::with_capacity(self.dim());
        for (i, name) in self.coords.iter().enumerate() {
            let j = Jet::variable(&space, i, point[i])?;
            env.insert(name.clone(), j.clone());
            coord_jets.push(j);
        }
        Ok(JetContext { space, env, coord_jets, point: point.to_vec() })
    }

    /// Index of a named coordinate.
    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }
}

/// Jet bindings of all chart coordinates at one sample point.
pub struct JetContext {
    pub space: Arc<JetSpace>,
    pub env: HashMap<String, Jet>,
    pub coord_jets: Vec<Jet>,
    pub point: Vec<f64>,
}

impl JetContext {
    pub fn dim(&self) -> usize {
        self.coord_jets.len()
    }

    pub fn constant(&self, v: f64) -> Jet {
        Jet::constant(&self.space, v)
    }

    pub fn zero(&self) -> Jet {
        Jet::constant(&self.space, 0.0)
    }

    /// Evaluate an expression in this context.
    pub fn eval(&self, e: &ScalarExpr) -> Result<Jet> {
        e.eval_jet(&self.env).map_err(|err| err.at_point(&self.point))
    }
}
