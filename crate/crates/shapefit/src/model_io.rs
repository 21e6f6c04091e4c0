//! JSON serialization of shape models.

use std::path::Path;

use serde::{Deserialize, Serialize};
use shapefit_core::ShapeModel;

use crate::error::Error;
use crate::json::{read_json, write_json};

pub const MODEL_FORMAT: &str = "shapefit-model-v1";

/// On-disk form of a [`ShapeModel`]. `n` is the point count, `t` the mode
/// count; `mean` and each entry of `modes` hold `3n` interleaved
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format: String,
    pub n: usize,
    pub t: usize,
    pub total_variance: f64,
    pub eigenvalues: Vec<f64>,
    pub mean: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub faces: Vec<[usize; 3]>,
}

impl ModelDocument {
    pub fn from_model(model: &ShapeModel) -> Self {
        Self {
            format: MODEL_FORMAT.to_string(),
            n: model.point_count(),
            t: model.mode_count(),
            total_variance: model.total_variance(),
            eigenvalues: model.eigenvalues().to_vec(),
            mean: model.mean().coords().to_vec(),
            modes: model.modes().to_vec(),
            faces: model.faces().to_vec(),
        }
    }

    pub fn into_model(self) -> Result<ShapeModel, String> {
        if self.format != MODEL_FORMAT {
            return Err(format!("unknown model format '{}', expected '{MODEL_FORMAT}'", self.format));
        }
        if self.mean.len() != 3 * self.n {
            return Err(format!("mean has {} values, expected 3n = {}", self.mean.len(), 3 * self.n));
        }
        if self.modes.len() != self.t {
            return Err(format!("{} modes stored, header says t = {}", self.modes.len(), self.t));
        }
        ShapeModel::from_parts(self.mean, self.modes, self.eigenvalues, self.faces, self.total_variance)
            .map_err(|e| e.to_string())
    }
}

pub fn read_model(path: &Path) -> Result<ShapeModel, Error> {
    let doc: ModelDocument = read_json(path)?;
    doc.into_model().map_err(|m| Error::parse(path, m))
}

pub fn write_model(model: &ShapeModel, path: &Path) -> Result<(), Error> {
    write_json(path, &ModelDocument::from_model(model))
}

#[cfg(test)]
mod tests {
    use super::*;
    use shapefit_core::{make_templates, SynthConfig};

    #[test]
    fn round_trip_is_exact() {
        let cfg = SynthConfig { template_count: 5, subdivisions: 1, ..Default::default() };
        let model = ShapeModel::build(&make_templates(&cfg).unwrap(), 0.95).unwrap();
        let text = serde_json::to_string(&ModelDocument::from_model(&model)).unwrap();
        let doc: ModelDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.n, 42);
        assert_eq!(doc.into_model().unwrap(), model);
    }

    #[test]
    fn rejects_inconsistent_documents() {
        let cfg = SynthConfig { template_count: 4, subdivisions: 1, ..Default::default() };
        let model = ShapeModel::build(&make_templates(&cfg).unwrap(), 0.95).unwrap();
        let doc = ModelDocument::from_model(&model);
        assert!(ModelDocument { format: "other".into(), ..doc.clone() }.into_model().is_err());
        assert!(ModelDocument { n: doc.n + 1, ..doc.clone() }.into_model().is_err());
        assert!(ModelDocument { t: doc.t + 1, ..doc.clone() }.into_model().is_err());
        let mut skewed = doc.clone();
        skewed.modes[0][0] += 0.1;
        assert!(skewed.into_model().is_err());
    }
}
