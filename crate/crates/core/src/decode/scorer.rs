use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{DecodeError, TokenId, TokenScorer, Vocab};

/// Sentence-start padding symbol for n-gram histories.
pub const BOS: &str = "<s>";
/// End-of-sentence token.
pub const EOS: &str = "</s>";

/// In-process scorer backed by a closure.
pub struct FnScorer<F> {
    vocab_size: usize,
    end: TokenId,
    f: F,
}

impl<F: Fn(&[TokenId]) -> Vec<f64> + Send + Sync> FnScorer<F> {
    pub fn new(vocab_size: usize, end: TokenId, f: F) -> Self {
        Self { vocab_size, end, f }
    }
}

impl<F: Fn(&[TokenId]) -> Vec<f64> + Send + Sync> TokenScorer for FnScorer<F> {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }
    fn end_token(&self) -> TokenId {
        self.end
    }
    fn log_probs(&self, prefix: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        Ok((self.f)(prefix))
    }
}

/// Fixed-order n-gram model with add-one smoothing:
/// `P(w | h) = (c(h w) + 1) / (Σ_v c(h v) + |V|)`.
#[derive(Debug, Clone)]
pub struct NgramScorer {
    order: usize,
    vocab: Vocab,
    end: TokenId,
    /// History (padded with `BOS`, as vocabulary strings) → continuation counts.
    counts: HashMap<Vec<String>, HashMap<TokenId, u64>>,
}

impl NgramScorer {
    /// Estimates counts from tokenized sentences; `EOS` is appended to each.
    pub fn train<S: AsRef<str>>(sentences: &[Vec<S>], order: usize) -> Result<Self, DecodeError> {
        let mut grams: Vec<(Vec<String>, u64)> = Vec::new();
        for s in sentences {
            let mut padded: Vec<String> = vec![BOS.to_owned(); order.saturating_sub(1)];
            padded.extend(s.iter().map(|t| t.as_ref().to_owned()));
            padded.push(EOS.to_owned());
            for w in padded.windows(order.max(1)) {
                grams.push((w.to_vec(), 1));
            }
        }
        Self::from_grams(order, grams)
    }

    fn from_grams(order: usize, grams: Vec<(Vec<String>, u64)>) -> Result<Self, DecodeError> {
        if order == 0 {
            return Err(DecodeError::Argument(
                "n-gram order must be at least 1".into(),
            ));
        }
        let mut words: BTreeSet<String> = BTreeSet::new();
        for (g, _) in &grams {
            if g.len() != order {
                return Err(DecodeError::Argument(format!(
                    "{}-gram in an order-{order} model",
                    g.len()
                )));
            }
            words.extend(g.iter().filter(|w| *w != BOS).cloned());
        }
        words.insert(EOS.to_owned());
        let vocab = Vocab::new(words.into_iter().collect())?;
        let end = vocab.id(EOS).expect("inserted above");
        let mut counts: HashMap<Vec<String>, HashMap<TokenId, u64>> = HashMap::new();
        for (mut g, c) in grams {
            let w = g.pop().expect("order >= 1");
            let id = vocab
                .id(&w)
                .ok_or_else(|| DecodeError::Argument(format!("{BOS} cannot be predicted")))?;
            *counts.entry(g).or_default().entry(id).or_insert(0) += c;
        }
        Ok(Self {
            order,
            vocab,
            end,
            counts,
        })
    }

    /// Reads `tok1 tok2 ... tokN<TAB>count` lines; every line must have the
    /// same N, which becomes the model order.
    pub fn from_counts_file(path: &Path) -> Result<Self, DecodeError> {
        let err = |message: String| DecodeError::File {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut grams = Vec::new();
        let mut order = None;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (g, c) = line
                .rsplit_once('\t')
                .ok_or_else(|| err(format!("line {}: expected n-gram<TAB>count", n + 1)))?;
            let count: u64 = c
                .trim()
                .parse()
                .map_err(|_| err(format!("line {}: bad count {c:?}", n + 1)))?;
            let gram: Vec<String> = g.split_whitespace().map(str::to_owned).collect();
            if *order.get_or_insert(gram.len()) != gram.len() {
                return Err(err(format!("line {}: mixed n-gram orders", n + 1)));
            }
            grams.push((gram, count));
        }
        Self::from_grams(order.ok_or_else(|| err("no n-grams".into()))?, grams)
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn order(&self) -> usize {
        self.order
    }
}

impl TokenScorer for NgramScorer {
    fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    fn end_token(&self) -> TokenId {
        self.end
    }

    fn log_probs(&self, prefix: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let h = self.order - 1;
        let mut history: Vec<String> = vec![BOS.to_owned(); h.saturating_sub(prefix.len())];
        for &t in &prefix[prefix.len().saturating_sub(h)..] {
            let w = self
                .vocab
                .token(t)
                .ok_or_else(|| DecodeError::Scorer(format!("unknown token id {t}")))?;
            history.push(w.to_owned());
        }
        let v = self.vocab.len() as f64;
        let cont = self.counts.get(&history);
        let total: u64 = cont.map_or(0, |c| c.values().sum());
        let denom = (total as f64 + v).ln();
        Ok((0..self.vocab.len() as TokenId)
            .map(|t| {
                let c = cont.and_then(|c| c.get(&t)).copied().unwrap_or(0);
                (c as f64 + 1.0).ln() - denom
            })
            .collect())
    }
}

#[derive(Serialize)]
struct Request<'a> {
    prefix: &'a [TokenId],
}

#[derive(Deserialize)]
struct Response {
    logprobs: Vec<f64>,
}

struct Pipe {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Scorer served by an external process speaking newline-delimited JSON:
/// `{"prefix": [ids]}` in, `{"logprobs": [...]}` out. Requests are
/// serialized through a mutex.
pub struct ProcessScorer {
    vocab_size: usize,
    end: TokenId,
    pipe: Mutex<Pipe>,
}

impl ProcessScorer {
    pub fn spawn(
        command: &str,
        args: &[String],
        vocab_size: usize,
        end: TokenId,
    ) -> Result<Self, DecodeError> {
        let mut child = Command::new(command)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| DecodeError::Scorer(format!("cannot start {command}: {e}")))?;
        let stdin = child.stdin.take().expect("piped");
        let stdout = BufReader::new(child.stdout.take().expect("piped"));
        Ok(Self {
            vocab_size,
            end,
            pipe: Mutex::new(Pipe {
                child,
                stdin,
                stdout,
            }),
        })
    }
}

impl TokenScorer for ProcessScorer {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn end_token(&self) -> TokenId {
        self.end
    }

    fn log_probs(&self, prefix: &[TokenId]) -> Result<Vec<f64>, DecodeError> {
        let mut pipe = self
            .pipe
            .lock()
            .map_err(|_| DecodeError::Scorer("scorer pipe poisoned".into()))?;
        let io = |e: std::io::Error| DecodeError::Scorer(format!("pipe: {e}"));
        let mut line = serde_json::to_string(&Request { prefix }).expect("serializable");
        line.push('\n');
        pipe.stdin.write_all(line.as_bytes()).map_err(io)?;
        pipe.stdin.flush().map_err(io)?;
        let mut reply = String::new();
        if pipe.stdout.read_line(&mut reply).map_err(io)? == 0 {
            return Err(DecodeError::Scorer(
                "scorer process closed its output".into(),
            ));
        }
        let r: Response = serde_json::from_str(&reply)
            .map_err(|e| DecodeError::Scorer(format!("bad reply: {e}")))?;
        Ok(r.logprobs)
    }
}

impl Drop for ProcessScorer {
    fn drop(&mut self) {
        if let Ok(p) = self.pipe.get_mut() {
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }
}
