//! Fixture files and a runner for the `avqa` binary.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn avqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avqa"))
        .args(args)
        .env_remove("AVQA_DATA_DIR")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = avqa(args);
    assert!(
        out.status.success(),
        "avqa {args:?} failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

pub fn write_jsonl(path: &Path, rows: &[Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).unwrap();
}

pub fn example(id: &str, question: &str, answers: &[&str]) -> Value {
    json!({
        "question_id": id,
        "image_id": format!("img{id}"),
        "image_uri": format!("{id}.jpg"),
        "question": question,
        "answers": answers.iter().map(|a| json!({"text": a, "confidence": "yes", "source_id": ""})).collect::<Vec<_>>(),
    })
}

/// `groups` holds (rewritten question, member indices, texts, labels).
pub fn grouping(
    qid: &str,
    annotator: &str,
    groups: &[(&str, &[usize], &[&str], &[&str])],
) -> Value {
    let mut g = json!({
        "schema_version": 1,
        "question_id": qid,
        "annotator_id": annotator,
        "ambiguous": !groups.is_empty(),
        "groups": groups.iter().map(|(q, idx, texts, labels)| json!({
            "rewritten_question": q,
            "answer_indices": idx,
            "answer_texts": texts,
            "labels": labels,
        })).collect::<Vec<_>>(),
    });
    if groups.is_empty() {
        g["skip_reason"] = json!("All answers to the same question");
    }
    g
}

pub const FLOWERS: [&str; 5] = [
    "daisy",
    "daisies",
    "purple",
    "gerbera daisy",
    "purple and white",
];

/// A small corpus: the flowers example, a location example, a colour
/// example and a yes/no example, plus word vectors for every answer word.
pub struct Corpus {
    pub dir: tempfile::TempDir,
    pub examples: PathBuf,
    pub embeddings: PathBuf,
    pub gold: PathBuf,
}

impl Corpus {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn p(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

pub fn corpus() -> Corpus {
    let dir = tempfile::tempdir().unwrap();
    let examples = dir.path().join("examples.jsonl");
    write_jsonl(
        &examples,
        &[
            example("393225000", "What kind of flowers are these?", &FLOWERS),
            example(
                "7",
                "Where is the fan?",
                &["ceiling", "on ceiling", "above", "kitchen"],
            ),
            example(
                "8",
                "What color is the bus?",
                &["red", "blue", "red and blue", "dark red"],
            ),
            example("9", "Is it raining?", &["yes", "no", "yes"]),
        ],
    );
    let embeddings = dir.path().join("vectors.txt");
    let words: [(&str, [f32; 3]); 15] = [
        ("daisy", [1.0, 0.1, 0.0]),
        ("daisies", [0.95, 0.15, 0.0]),
        ("gerbera", [0.9, 0.0, 0.1]),
        ("purple", [0.0, 1.0, 0.1]),
        ("white", [0.1, 0.9, 0.0]),
        ("and", [0.3, 0.3, 0.3]),
        ("ceiling", [0.0, 0.1, 1.0]),
        ("on", [0.2, 0.2, 0.5]),
        ("above", [0.1, 0.0, 0.9]),
        ("kitchen", [0.8, 0.8, 0.0]),
        ("red", [0.0, 1.0, 0.0]),
        ("blue", [0.1, 0.8, 0.2]),
        ("dark", [0.2, 0.7, 0.1]),
        ("yes", [0.5, 0.5, 0.5]),
        ("no", [0.5, 0.4, 0.5]),
    ];
    let text: String = words
        .iter()
        .map(|(w, v)| format!("{w} {} {} {}\n", v[0], v[1], v[2]))
        .collect();
    std::fs::write(&embeddings, text).unwrap();
    let gold = dir.path().join("gold.jsonl");
    write_jsonl(
        &gold,
        &[
            grouping(
                "393225000",
                "a1",
                &[
                    (
                        "What species of flowers are these?",
                        &[0, 1, 3],
                        &["daisy", "daisies", "gerbera daisy"],
                        &["kind"],
                    ),
                    (
                        "What color are these flowers?",
                        &[2, 4],
                        &["purple", "purple and white"],
                        &["kind"],
                    ),
                ],
            ),
            grouping(
                "7",
                "a1",
                &[
                    (
                        "Where in the room is the fan?",
                        &[0, 1, 2],
                        &["ceiling", "on ceiling", "above"],
                        &["location"],
                    ),
                    (
                        "In which room is the fan?",
                        &[3],
                        &["kitchen"],
                        &["location"],
                    ),
                ],
            ),
            grouping("8", "a1", &[]),
        ],
    );
    Corpus {
        dir,
        examples,
        embeddings,
        gold,
    }
}

/// `n` examples whose answers come from 2–3 planted topics. Each topic has
/// its own direction in a 6-d space; word vectors are that direction plus
/// small noise. Writes `planted_gold.jsonl` and `planted_vectors.txt`.
pub fn planted(dir: &Path, n: usize, seed: u64) -> (PathBuf, PathBuf) {
    const DIM: usize = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors = String::new();
    let mut gold = Vec::new();
    for e in 0..n {
        let k = rng.gen_range(2..=3);
        let mut topics: Vec<usize> = (0..DIM).collect();
        for i in 0..k {
            let j = rng.gen_range(i..DIM);
            topics.swap(i, j);
        }
        let mut texts: Vec<(String, usize)> = Vec::new();
        for (g, &topic) in topics[..k].iter().enumerate() {
            let size = rng.gen_range(2..=3);
            for m in 0..size {
                let word = format!("w{e}x{g}x{m}");
                let v: Vec<String> = (0..DIM)
                    .map(|d| {
                        let base = if d == topic { 1.0 } else { 0.0 };
                        format!("{:.4}", base + rng.gen_range(-0.1..0.1))
                    })
                    .collect();
                vectors.push_str(&format!("{word} {}\n", v.join(" ")));
                texts.push((word, g));
            }
        }
        // interleave the groups so indices do not reveal them
        for i in (1..texts.len()).rev() {
            let j = rng.gen_range(0..=i);
            texts.swap(i, j);
        }
        let groups: Vec<Value> = (0..k)
            .map(|g| {
                let idx: Vec<usize> = (0..texts.len()).filter(|&i| texts[i].1 == g).collect();
                let t: Vec<&str> = idx.iter().map(|&i| texts[i].0.as_str()).collect();
                json!({
                    "rewritten_question": format!("Question {g}?"),
                    "answer_indices": idx,
                    "answer_texts": t,
                    "labels": ["kind"],
                })
            })
            .collect();
        gold.push(json!({
            "schema_version": 1,
            "question_id": format!("p{e}"),
            "annotator_id": "gold",
            "ambiguous": true,
            "groups": groups,
        }));
    }
    let gold_path = dir.join("planted_gold.jsonl");
    let vec_path = dir.join("planted_vectors.txt");
    write_jsonl(&gold_path, &gold);
    std::fs::write(&vec_path, vectors).unwrap();
    (gold_path, vec_path)
}
