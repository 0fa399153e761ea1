//! On-disk task layout:
//!
//! ```text
//! <dir>/bias.pl        head_pred, body_pred and limit declarations
//! <dir>/exs.pl         pos(f(id)). / neg(f(id)). one per line
//! <dir>/facts/<id>.pl  probabilistic facts for one example
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kb::{ExampleRecord, Label};
use crate::logic::Bias;
use crate::parser::{parse_bias, parse_examples, parse_facts, print_bias, print_examples, print_facts};
use crate::search::Task;

pub const BIAS_FILE: &str = "bias.pl";
pub const EXAMPLES_FILE: &str = "exs.pl";
pub const FACTS_DIR: &str = "facts";

#[derive(Clone, Debug, PartialEq)]
pub struct TaskBundle {
    pub bias: Bias,
    pub examples: Vec<ExampleRecord>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

impl TaskBundle {
    pub fn facts_path(dir: &Path, id: &str) -> PathBuf {
        dir.join(FACTS_DIR).join(format!("{id}.pl"))
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let bias_path = dir.join(BIAS_FILE);
        let bias = parse_bias(&read(&bias_path)?).map_err(|e| Error::in_file(&bias_path, e))?;
        let exs_path = dir.join(EXAMPLES_FILE);
        let labels = parse_examples(&read(&exs_path)?).map_err(|e| Error::in_file(&exs_path, e))?;
        let mut examples = Vec::with_capacity(labels.len());
        for (id, label) in labels {
            let path = Self::facts_path(dir, &id);
            if !path.is_file() {
                return Err(Error::MissingFacts { id, path });
            }
            let facts = parse_facts(&read(&path)?).map_err(|e| Error::in_file(&path, e))?;
            examples.push(ExampleRecord::new(id, label, facts));
        }
        Ok(TaskBundle { bias, examples })
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let facts_dir = dir.join(FACTS_DIR);
        fs::create_dir_all(&facts_dir).map_err(|e| Error::io(&facts_dir, e))?;
        write(&dir.join(BIAS_FILE), &print_bias(&self.bias))?;
        write(&dir.join(EXAMPLES_FILE), &self.examples_text())?;
        for ex in &self.examples {
            write(&Self::facts_path(dir, &ex.id), &print_facts(&ex.facts))?;
        }
        Ok(())
    }

    pub fn examples_text(&self) -> String {
        let labels: Vec<(String, Label)> = self.examples.iter().map(|e| (e.id.clone(), e.label)).collect();
        print_examples(&self.bias.head_pred.name, &labels)
    }

    pub fn task(&self) -> Task {
        Task {
            bias: self.bias.clone(),
            examples: self.examples.clone(),
        }
    }

    /// Keeps the examples whose ids are listed, in the listed order.
    pub fn subset(&self, ids: &[String]) -> TaskBundle {
        TaskBundle {
            bias: self.bias.clone(),
            examples: ids
                .iter()
                .filter_map(|id| self.examples.iter().find(|e| &e.id == id).cloned())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::PredSig;

    fn bundle() -> TaskBundle {
        TaskBundle {
            bias: Bias::new(PredSig::new("f", 1), vec![PredSig::new("vehicle", 1)]).unwrap(),
            examples: vec![
                ExampleRecord::new("img1", Label::Positive, parse_facts("0.7 :: vehicle(img1).").unwrap()),
                ExampleRecord::new("img2", Label::Negative, parse_facts("road(img2).").unwrap()),
            ],
        }
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let b = bundle();
        b.write(dir.path()).unwrap();
        assert_eq!(TaskBundle::read(dir.path()).unwrap(), b);
    }

    #[test]
    fn missing_facts_file() {
        let dir = tempfile::tempdir().unwrap();
        bundle().write(dir.path()).unwrap();
        fs::remove_file(TaskBundle::facts_path(dir.path(), "img2")).unwrap();
        let err = TaskBundle::read(dir.path()).unwrap_err();
        assert!(matches!(err, Error::MissingFacts { ref id, .. } if id == "img2"));
        assert!(err.is_input_error());
    }

    #[test]
    fn parse_error_names_file() {
        let dir = tempfile::tempdir().unwrap();
        bundle().write(dir.path()).unwrap();
        fs::write(TaskBundle::facts_path(dir.path(), "img1"), "1.5 :: vehicle(img1).").unwrap();
        let err = TaskBundle::read(dir.path()).unwrap_err();
        assert!(err.to_string().contains("img1.pl"), "{err}");
        assert!(err.is_input_error());
    }
}
