//! Connection one-forms sampled as closures over parameter coordinates.
//!
//! An [`AbelianField`] returns one real component per direction; a
//! [`MatrixField`] returns one `k x k` matrix per direction. Matrix fields are
//! Hermitian gauge potentials entering `exp(±i g A dx)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

type CovectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type MatrixFn = dyn Fn(&[f64]) -> Result<Vec<CMatrix>> + Send + Sync;

/// Declared singular point and the exclusion radius around it.
#[derive(Debug, Clone, PartialEq)]
pub struct Singularity {
    pub point: Vec<f64>,
    pub margin: f64,
}

#[derive(Clone)]
pub struct AbelianField {
    label: String,
    names: Arc<[String]>,
    eval: Arc<CovectorFn>,
    singularities: Vec<Singularity>,
}

impl fmt::Debug for AbelianField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AbelianField")
            .field("label", &self.label)
            .field("names", &self.names)
            .field("singularities", &self.singularities)
            .finish()
    }
}

impl AbelianField {
    pub fn new<F>(label: &str, names: &[&str], eval: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        AbelianField {
            label: label.to_string(),
            names: names.iter().map(|s| s.to_string()).collect(),
            eval: Arc::new(eval),
            singularities: Vec::new(),
        }
    }

    pub fn with_singularity(mut self, point: Vec<f64>, margin: f64) -> Self {
        self.singularities.push(Singularity { point, margin });
        self
    }

    pub fn zero(names: &[&str]) -> Self {
        let n = names.len();
        Self::new("zero", names, move |_| vec![0.0; n])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn singularities(&self) -> &[Singularity] {
        &self.singularities
    }

    /// Error if `x` lies inside any declared exclusion radius.
    pub fn check_regular(&self, x: &[f64]) -> Result<()> {
        for s in &self.singularities {
            let d2: f64 = s.point.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
            if d2.sqrt() < s.margin {
                return Err(Error::Singular {
                    field: self.label.clone(),
                    point: x.to_vec(),
                    margin: s.margin,
                });
            }
        }
        Ok(())
    }

    /// Covector at `x`, refusing points near a singularity.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        self.check_regular(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn eval_unchecked(&self, x: &[f64]) -> Vec<f64> {
        (self.eval)(x)
    }

    pub fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.names.len() {
            return Err(Error::Dimension(format!(
                "field `{}` takes {} coordinates, got {}",
                self.label,
                self.names.len(),
                x.len()
            )));
        }
        Ok(())
    }

    /// `a + b`, keeping the singular loci of both.
    pub fn plus(&self, other: &AbelianField) -> Result<AbelianField> {
        if self.names != other.names {
            return Err(Error::SchemaMismatch {
                expected: self.names.to_vec(),
                found: other.names.to_vec(),
            });
        }
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut singularities = self.singularities.clone();
        singularities.extend(other.singularities.iter().cloned());
        Ok(AbelianField {
            label: format!("{}+{}", self.label, other.label),
            names: self.names.clone(),
            eval: Arc::new(move |x| {
                a(x).into_iter().zip(b(x)).map(|(p, q)| p + q).collect()
            }),
            singularities,
        })
    }
}

#[derive(Clone)]
pub struct MatrixField {
    label: String,
    names: Arc<[String]>,
    dim: usize,
    eval: Arc<MatrixFn>,
}

impl fmt::Debug for MatrixField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixField")
            .field("label", &self.label)
            .field("names", &self.names)
            .field("dim", &self.dim)
            .finish()
    }
}

impl MatrixField {
    pub fn new<F>(label: &str, names: &[&str], dim: usize, eval: F) -> Self
    where
        F: Fn(&[f64]) -> Result<Vec<CMatrix>> + Send + Sync + 'static,
    {
        MatrixField {
            label: label.to_string(),
            names: names.iter().map(|s| s.to_string()).collect(),
            dim,
            eval: Arc::new(eval),
        }
    }

    /// The same matrices at every point.
    pub fn constant(names: &[&str], values: Vec<CMatrix>) -> Result<Self> {
        if values.len() != names.len() {
            return Err(Error::Dimension(format!(
                "{} directions but {} matrices",
                names.len(),
                values.len()
            )));
        }
        let dim = values.first().map_or(0, |m| m.nrows());
        Ok(Self::new("constant", names, dim, move |_| Ok(values.clone())))
    }

    pub fn zero(names: &[&str], dim: usize) -> Self {
        let n = names.len();
        Self::new("zero", names, dim, move |_| Ok(vec![CMatrix::zeros(dim, dim); n]))
    }

    /// `1 x 1` matrix field carrying an Abelian potential.
    pub fn from_abelian(field: &AbelianField) -> Self {
        let inner = field.clone();
        MatrixField {
            label: field.label.clone(),
            names: field.names.clone(),
            dim: 1,
            eval: Arc::new(move |x| {
                Ok(inner
                    .eval(x)?
                    .into_iter()
                    .map(|a| CMatrix::from_element(1, 1, a.into()))
                    .collect())
            }),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrices per direction at `x`, checked for shape.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<CMatrix>> {
        if x.len() != self.names.len() {
            return Err(Error::Dimension(format!(
                "field `{}` takes {} coordinates, got {}",
                self.label,
                self.names.len(),
                x.len()
            )));
        }
        let mats = (self.eval)(x)?;
        if mats.len() != self.names.len() {
            return Err(Error::Dimension(format!(
                "field `{}` returned {} components for {} directions",
                self.label,
                mats.len(),
                self.names.len()
            )));
        }
        for m in &mats {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::Dimension(format!(
                    "field `{}` returned a {}x{} component, expected {}x{}",
                    self.label,
                    m.nrows(),
                    m.ncols(),
                    self.dim,
                    self.dim
                )));
            }
        }
        Ok(mats)
    }
}
