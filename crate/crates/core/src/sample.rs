use std::path::PathBuf;

/// Where a sample came from. Carried along so reports and serialized
/// results can echo the generator or file that produced the data.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Drawn from a named generator with a seeded stream.
    Generated {
        distribution: String,
        master_seed: u64,
        stream_index: u64,
    },
    /// Read from a data file.
    File(PathBuf),
    /// Constructed directly from values (tests, ad-hoc use).
    Values,
}

/// An ordered finite sequence of real observations plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    provenance: Provenance,
}

impl Sample {
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Self {
        Self { values, provenance }
    }

    /// A sample with no generator/file history.
    pub fn from_values(values: Vec<f64>) -> Self {
        Self::new(values, Provenance::Values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}
