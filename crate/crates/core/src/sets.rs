//! Sorted index sets for frequencies and sampled vertices.

use serde::Serialize;

use crate::error::{Error, Result};

fn normalise(mut indices: Vec<usize>, size: usize) -> Result<Vec<usize>> {
    indices.sort_unstable();
    for pair in indices.windows(2) {
        if pair[0] == pair[1] {
            return Err(Error::InvalidConfig(format!(
                "duplicate index {} in set",
                pair[0]
            )));
        }
    }
    if let Some(&last) = indices.last() {
        if last >= size {
            return Err(Error::IndexOutOfRange {
                index: last,
                size,
            });
        }
    }
    Ok(indices)
}

macro_rules! index_set {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Clone, Debug, PartialEq, Eq, Serialize)]
        #[serde(transparent)]
        pub struct $name {
            indices: Vec<usize>,
        }

        impl $name {
            /// Builds a set from arbitrary indices in `0..size`.
            /// Input order is irrelevant; duplicates are rejected.
            pub fn new(indices: Vec<usize>, size: usize) -> Result<Self> {
                Ok(Self {
                    indices: normalise(indices, size)?,
                })
            }

            /// The `count` lowest indices `0..count` out of `0..size`.
            pub fn lowest(count: usize, size: usize) -> Result<Self> {
                if count > size {
                    return Err(Error::InvalidConfig(format!(
                        "cannot take {count} indices out of {size}"
                    )));
                }
                Ok(Self {
                    indices: (0..count).collect(),
                })
            }

            /// The full set `0..size`.
            pub fn all(size: usize) -> Self {
                Self {
                    indices: (0..size).collect(),
                }
            }

            /// Sorted indices.
            pub fn indices(&self) -> &[usize] {
                &self.indices
            }

            /// Cardinality of the set.
            pub fn len(&self) -> usize {
                self.indices.len()
            }

            /// True when the set is empty.
            pub fn is_empty(&self) -> bool {
                self.indices.is_empty()
            }

            /// Membership test.
            pub fn contains(&self, index: usize) -> bool {
                self.indices.binary_search(&index).is_ok()
            }

            /// Complement within `0..size`.
            pub fn complement(&self, size: usize) -> Self {
                Self {
                    indices: (0..size).filter(|i| !self.contains(*i)).collect(),
                }
            }

            /// Indicator mask of length `size`.
            pub fn mask(&self, size: usize) -> Vec<bool> {
                let mut m = vec![false; size];
                for &i in &self.indices {
                    if i < size {
                        m[i] = true;
                    }
                }
                m
            }
        }
    };
}

index_set!(
    /// A set of graph-frequency indices (rows of the spectral basis).
    FrequencySet
);
index_set!(
    /// A set of observed vertices.
    SamplingSet
);
