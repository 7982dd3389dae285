//! GloVe-format word vectors and mean-pooled answer embeddings.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected {expected} values after the word, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {value:?} is not a finite number")]
    BadFloat { line: usize, value: String },
    #[error("table dimension {found} does not match expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("embedding table is empty")]
    EmptyTable,
    #[error("cannot embed an empty answer")]
    EmptyInput,
}

/// Word vectors stored contiguously in `f32`; pooling happens in `f64`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    data: Vec<f32>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Builds a table from `(word, vector)` pairs. Duplicate words keep
    /// their first vector.
    pub fn from_entries<I, S>(dim: usize, entries: I) -> Result<Self, EmbeddingError>
    where
        I: IntoIterator<Item = (S, Vec<f32>)>,
        S: Into<String>,
    {
        let mut table = Self {
            dim,
            index: HashMap::new(),
            data: Vec::new(),
            duplicates: 0,
        };
        for (i, (word, v)) in entries.into_iter().enumerate() {
            if v.len() != dim {
                return Err(EmbeddingError::Arity {
                    line: i + 1,
                    expected: dim,
                    found: v.len(),
                });
            }
            table.insert(word.into(), &v);
        }
        Ok(table)
    }

    fn insert(&mut self, word: String, v: &[f32]) {
        if self.index.contains_key(&word) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(word, self.data.len() / self.dim);
        self.data.extend_from_slice(v);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Number of rows skipped because their word was already present.
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&row| &self.data[row * self.dim..(row + 1) * self.dim])
    }

    /// Copy of the table with every vector multiplied by `factor`.
    pub fn scaled(&self, factor: f32) -> Self {
        Self {
            data: self.data.iter().map(|x| x * factor).collect(),
            ..self.clone()
        }
    }
}

/// Reads a GloVe text file: one `word f1 ... fd` row per line.
///
/// Without `expected_dim` the dimension is taken from the first row.
pub fn load_embedding_table(
    path: &Path,
    expected_dim: Option<usize>,
) -> Result<EmbeddingTable, EmbeddingError> {
    let io = |source| EmbeddingError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut table: Option<EmbeddingTable> = None;
    let mut row = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        row.clear();
        for f in fields {
            match f.parse::<f32>() {
                Ok(x) if x.is_finite() => row.push(x),
                _ => {
                    return Err(EmbeddingError::BadFloat {
                        line: line_no,
                        value: f.to_owned(),
                    })
                }
            }
        }
        let t = match table.as_mut() {
            Some(t) => t,
            None => {
                if let Some(exp) = expected_dim {
                    if row.len() != exp {
                        return Err(EmbeddingError::Dimension {
                            expected: exp,
                            found: row.len(),
                        });
                    }
                }
                if row.is_empty() {
                    return Err(EmbeddingError::Arity {
                        line: line_no,
                        expected: 1,
                        found: 0,
                    });
                }
                table.insert(EmbeddingTable {
                    dim: row.len(),
                    index: HashMap::new(),
                    data: Vec::new(),
                    duplicates: 0,
                })
            }
        };
        if row.len() != t.dim {
            return Err(EmbeddingError::Arity {
                line: line_no,
                expected: t.dim,
                found: row.len(),
            });
        }
        t.insert(word.to_owned(), &row);
    }
    table.ok_or(EmbeddingError::EmptyTable)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerVector {
    pub vector: Vec<f64>,
    pub oov_words: usize,
    pub words: usize,
}

impl AnswerVector {
    pub fn oov_fraction(&self) -> f64 {
        self.oov_words as f64 / self.words as f64
    }

    /// True when no word of the answer had an embedding.
    pub fn all_oov(&self) -> bool {
        self.oov_words == self.words
    }
}

/// Mean of the in-vocabulary word vectors of an already-normalized answer.
/// Out-of-vocabulary words are skipped; an all-OOV answer yields the zero
/// vector.
pub fn embed_answer(
    table: &EmbeddingTable,
    answer_text: &str,
) -> Result<AnswerVector, EmbeddingError> {
    let mut sum = vec![0.0f64; table.dim];
    let mut words = 0;
    let mut hits = 0;
    for w in answer_text.split_whitespace() {
        words += 1;
        if let Some(v) = table.get(w) {
            hits += 1;
            for (s, &x) in sum.iter_mut().zip(v) {
                *s += f64::from(x);
            }
        }
    }
    if words == 0 {
        return Err(EmbeddingError::EmptyInput);
    }
    if hits > 0 {
        let n = hits as f64;
        sum.iter_mut().for_each(|s| *s /= n);
    }
    Ok(AnswerVector {
        vector: sum,
        oov_words: words - hits,
        words,
    })
}
