//! JSON file formats. Complex numbers are `[re, im]` pairs and matrices are
//! arrays of rows.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generalized::GeneralizedLindbladModel;
use crate::lindblad::LindbladModel;
use crate::numerics::{CMatrix, C64};
use crate::trajectory::GeneratorTrajectory;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

/// Parses a square `dim x dim` matrix; `field` names it in diagnostics.
pub fn matrix_from_json(rows: &MatrixJson, dim: usize, field: &str) -> Result<CMatrix> {
    if rows.len() != dim {
        return Err(Error::invalid(
            field,
            format!("expected {dim} rows, found {}", rows.len()),
        ));
    }
    let mut data = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::invalid(
                format!("{field}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
        for (j, z) in row.iter().enumerate() {
            if !z[0].is_finite() || !z[1].is_finite() {
                return Err(Error::invalid(
                    format!("{field}[{i}][{j}]"),
                    "non-finite entry",
                ));
            }
            data.push(C64::new(z[0], z[1]));
        }
    }
    CMatrix::from_vec(dim, dim, data)
}

/// Square matrix whose dimension is taken from its row count.
pub fn square_from_json(rows: &MatrixJson, field: &str) -> Result<CMatrix> {
    matrix_from_json(rows, rows.len(), field)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub dim: usize,
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub lindblad_ops: Vec<MatrixJson>,
}

impl ModelFile {
    pub fn from_model(m: &LindbladModel) -> Self {
        ModelFile {
            dim: m.dim(),
            hamiltonian: matrix_to_json(m.hamiltonian()),
            lindblad_ops: m.lindblad_ops().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_model(&self) -> Result<LindbladModel> {
        check_dim(self.dim)?;
        let h = matrix_from_json(&self.hamiltonian, self.dim, "hamiltonian")?;
        let ops = self
            .lindblad_ops
            .iter()
            .enumerate()
            .map(|(k, l)| matrix_from_json(l, self.dim, &format!("lindblad_ops[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        LindbladModel::new(h, ops)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionJson {
    pub to_k: usize,
    pub from_j: usize,
    pub lambda: usize,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneralizedModelFile {
    pub dim: usize,
    pub components: usize,
    pub hamiltonians: Vec<MatrixJson>,
    #[serde(default)]
    pub transitions: Vec<TransitionJson>,
}

impl GeneralizedModelFile {
    pub fn from_model(m: &GeneralizedLindbladModel) -> Self {
        GeneralizedModelFile {
            dim: m.dim(),
            components: m.components(),
            hamiltonians: m.hamiltonians().iter().map(matrix_to_json).collect(),
            transitions: m
                .transitions()
                .iter()
                .map(|(&(to_k, from_j, lambda), r)| TransitionJson {
                    to_k,
                    from_j,
                    lambda,
                    matrix: matrix_to_json(r),
                })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<GeneralizedLindbladModel> {
        check_dim(self.dim)?;
        if self.hamiltonians.len() != self.components {
            return Err(Error::invalid(
                "hamiltonians",
                format!(
                    "expected {} matrices, found {}",
                    self.components,
                    self.hamiltonians.len()
                ),
            ));
        }
        let hs = self
            .hamiltonians
            .iter()
            .enumerate()
            .map(|(k, h)| matrix_from_json(h, self.dim, &format!("hamiltonians[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let ts = self
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let r = matrix_from_json(&t.matrix, self.dim, &format!("transitions[{i}].matrix"))?;
                Ok(((t.to_k, t.from_j, t.lambda), r))
            })
            .collect::<Result<Vec<_>>>()?;
        GeneralizedLindbladModel::new(hs, ts)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::invalid("dim", "dimension must be at least 1"));
    }
    Ok(())
}

/// Sampled generator: strictly increasing `times` and one square matrix per time.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorFile {
    pub times: Vec<f64>,
    pub matrices: Vec<MatrixJson>,
}

impl GeneratorFile {
    pub fn from_trajectory(g: &GeneratorTrajectory) -> Self {
        GeneratorFile {
            times: g.times().to_vec(),
            matrices: g.matrices().iter().map(matrix_to_json).collect(),
        }
    }

    pub fn to_trajectory(&self) -> Result<GeneratorTrajectory> {
        let dim = self.matrices.first().map_or(0, Vec::len);
        let mats = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m, dim, &format!("matrices[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        GeneratorTrajectory::new(self.times.clone(), mats)
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ops;
    use crate::two_band::{build_model, TwoBandParams};

    #[test]
    fn model_round_trip_is_exact() {
        let h = CMatrix::from_fn(3, 3, |i, j| {
            let x = (i * 3 + j) as f64 * 0.1 + 1.0 / 3.0;
            C64::new(x, if i == j { 0.0 } else { x * x })
        })
        .hermitian_part();
        let l = CMatrix::from_fn(3, 3, |i, j| {
            C64::new(1.0 / (1 + i + j) as f64, -0.2 * i as f64)
        });
        let m = LindbladModel::new(h, vec![l]).unwrap();
        let text = serde_json::to_string(&ModelFile::from_model(&m)).unwrap();
        let back: ModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_model().unwrap(), m);
    }

    #[test]
    fn generalized_round_trip_is_exact() {
        let m = build_model(TwoBandParams::new(0.37, 1.9).unwrap());
        let text = serde_json::to_string(&GeneralizedModelFile::from_model(&m)).unwrap();
        let back: GeneralizedModelFile = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_model().unwrap(), m);
    }

    #[test]
    fn bad_row_names_the_field() {
        let f = ModelFile {
            dim: 2,
            hamiltonian: matrix_to_json(&ops::sigma_z()),
            lindblad_ops: vec![vec![vec![[0.0, 0.0]; 2], vec![[0.0, 0.0]; 3]]],
        };
        let e = f.to_model().unwrap_err();
        assert_eq!(e.field(), Some("lindblad_ops[0][1]"));
    }

    #[test]
    fn non_hermitian_hamiltonian_names_the_field() {
        let f = ModelFile {
            dim: 2,
            hamiltonian: matrix_to_json(&ops::sigma_plus()),
            lindblad_ops: vec![],
        };
        assert_eq!(f.to_model().unwrap_err().field(), Some("hamiltonian"));
    }
}
