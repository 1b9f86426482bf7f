//! Classification metrics: per-class precision, recall, F1 and support,
//! overall accuracy and the confusion matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NUM_CLASSES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: u8,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub classes: Vec<ClassMetrics>,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub total: usize,
    /// Rows are true classes, columns predicted classes.
    pub confusion: [[usize; NUM_CLASSES]; NUM_CLASSES],
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

pub fn classification_report(y_true: &[u8], y_pred: &[u8]) -> Result<ClassificationReport> {
    if y_true.len() != y_pred.len() {
        return Err(Error::InvalidArgument(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::InvalidArgument("no samples to evaluate".into()));
    }
    let mut confusion = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t as usize >= NUM_CLASSES || p as usize >= NUM_CLASSES {
            return Err(Error::InvalidArgument(format!(
                "label pair ({t}, {p}) outside 0..{NUM_CLASSES}"
            )));
        }
        confusion[t as usize][p as usize] += 1;
    }
    let classes: Vec<ClassMetrics> = (0..NUM_CLASSES)
        .map(|c| {
            let correct = confusion[c][c];
            let support: usize = confusion[c].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[c]).sum();
            let precision = ratio(correct, predicted);
            let recall = ratio(correct, support);
            ClassMetrics {
                class: c as u8,
                precision,
                recall,
                f1: f1_score(precision, recall),
                support,
            }
        })
        .collect();
    let trace: usize = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
    let total = y_true.len();
    let macro_f1 = classes.iter().map(|c| c.f1).sum::<f64>() / NUM_CLASSES as f64;
    Ok(ClassificationReport {
        classes,
        accuracy: ratio(trace, total),
        macro_f1,
        total,
        confusion,
    })
}

impl ClassificationReport {
    /// Aligned plain-text rendering for terminals.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:>8} {:>10} {:>10} {:>10} {:>8}\n",
            "class", "precision", "recall", "f1", "support"
        );
        for c in &self.classes {
            out.push_str(&format!(
                "{:>8} {:>10.2} {:>10.2} {:>10.2} {:>8}\n",
                c.class, c.precision, c.recall, c.f1, c.support
            ));
        }
        out.push_str(&format!(
            "{:>8} {:>32.3} {:>8}\n",
            "accuracy", self.accuracy, self.total
        ));
        out.push_str(&format!("{:>8} {:>32.3}\n", "macro f1", self.macro_f1));
        out.push_str("confusion (rows true, cols predicted)\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>5}")).collect();
            out.push_str(&cells.join(""));
            out.push('\n');
        }
        out
    }

    /// Confusion matrix as CSV with header `true,pred0,...`.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true");
        for c in 0..NUM_CLASSES {
            out.push_str(&format!(",pred{c}"));
        }
        out.push('\n');
        for (t, row) in self.confusion.iter().enumerate() {
            out.push_str(&t.to_string());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}
