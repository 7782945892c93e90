use serde::{Deserialize, Serialize};

/// `rows[t-1][i-1]` is the score on task i after experiencing tasks 1..t.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerformanceMatrix {
    pub rows: Vec<Vec<f64>>,
    /// Score of each task for an agent without prior experience.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Vec<f64>>,
}

impl PerformanceMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn validate(&self) -> Result<(), String> {
        for (t, row) in self.rows.iter().enumerate() {
            if row.len() != t + 1 {
                return Err(format!("row {} has {} entries, expected {}", t + 1, row.len(), t + 1));
            }
            if let Some(x) = row.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(format!("row {} has score {x} outside [0,1]", t + 1));
            }
        }
        if let Some(b) = &self.baseline {
            if b.len() != self.rows.len() {
                return Err(format!("baseline has {} entries for {} tasks", b.len(), self.rows.len()));
            }
        }
        Ok(())
    }

    fn j(&self, t: usize, i: usize) -> f64 {
        self.rows[t - 1][i - 1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifelongStep {
    pub t: usize,
    pub ap: f64,
    pub fgt: Option<f64>,
    pub bwt: Option<f64>,
    pub fwt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifelongMetrics {
    pub steps: Vec<LifelongStep>,
    pub aip: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub fn average_performance(m: &PerformanceMatrix, t: usize) -> f64 {
    (1..=t).map(|i| m.j(t, i)).sum::<f64>() / t as f64
}

pub fn forgetting(m: &PerformanceMatrix, t: usize) -> Option<f64> {
    (t > 1).then(|| {
        (1..t)
            .map(|i| {
                let best = (i..=t).map(|j| m.j(j, i)).fold(f64::NEG_INFINITY, f64::max);
                best - m.j(t, i)
            })
            .sum::<f64>()
            / (t - 1) as f64
    })
}

pub fn backward_transfer(m: &PerformanceMatrix, t: usize) -> Option<f64> {
    (t > 1).then(|| (1..t).map(|i| m.j(t, i) - m.j(i, i)).sum::<f64>() / (t - 1) as f64)
}

pub fn forward_transfer(m: &PerformanceMatrix, t: usize) -> Option<f64> {
    let base = m.baseline.as_ref()?;
    (t > 1).then(|| (2..=t).map(|i| m.j(i, i) - base[i - 1]).sum::<f64>() / (t - 1) as f64)
}

pub fn compute_lifelong_metrics(m: &PerformanceMatrix) -> Result<LifelongMetrics, String> {
    m.validate()?;
    let steps: Vec<LifelongStep> = (1..=m.len())
        .map(|t| LifelongStep {
            t,
            ap: average_performance(m, t),
            fgt: forgetting(m, t),
            bwt: backward_transfer(m, t),
            fwt: forward_transfer(m, t),
        })
        .collect();
    let aip = (!steps.is_empty()).then(|| steps.iter().map(|s| s.ap).sum::<f64>() / steps.len() as f64);
    let mut notes = Vec::new();
    if m.baseline.is_none() {
        notes.push("no baseline scores supplied; FWT is null".to_string());
    }
    Ok(LifelongMetrics { steps, aip, notes })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferValidation {
    pub with_knowledge: f64,
    pub baseline: f64,
    pub v: f64,
    pub note: String,
}

pub fn compute_transfer_validation(with_knowledge: f64, baseline: f64) -> TransferValidation {
    let v = with_knowledge - baseline;
    let note = if v > 0.0 {
        "positive: accumulated experience improved performance"
    } else if v < 0.0 {
        "negative: accumulated experience hurt performance; it may be stale or off-target"
    } else {
        "zero: accumulated experience made no difference"
    };
    TransferValidation {
        with_knowledge,
        baseline,
        v,
        note: note.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_example() {
        let m = PerformanceMatrix {
            rows: vec![vec![1.0], vec![0.8, 0.9]],
            baseline: None,
        };
        let r = compute_lifelong_metrics(&m).unwrap();
        assert!((r.steps[1].ap - 0.85).abs() < 1e-12);
        assert!((r.steps[1].fgt.unwrap() - 0.2).abs() < 1e-12);
        assert!((r.steps[1].bwt.unwrap() + 0.2).abs() < 1e-12);
        assert_eq!(r.steps[0].fgt, None);
        assert_eq!(r.steps[1].fwt, None);
    }

    #[test]
    fn baseline_equal_to_diagonal_gives_zero_fwt() {
        let m = PerformanceMatrix {
            rows: vec![vec![0.3], vec![0.1, 0.7], vec![0.2, 0.4, 0.5]],
            baseline: Some(vec![0.3, 0.7, 0.5]),
        };
        assert_eq!(forward_transfer(&m, 3), Some(0.0));
    }

    #[test]
    fn transfer_sign() {
        let v = compute_transfer_validation(0.9, 0.6);
        assert!((v.v - 0.3).abs() < 1e-12);
        let v = compute_transfer_validation(0.4, 0.7);
        assert!(v.v < 0.0 && v.note.starts_with("negative"));
        assert_eq!(compute_transfer_validation(0.5, 0.5).v, 0.0);
    }

    #[test]
    fn shape_errors() {
        let m = PerformanceMatrix {
            rows: vec![vec![1.0, 0.0]],
            baseline: None,
        };
        assert!(compute_lifelong_metrics(&m).is_err());
        let m = PerformanceMatrix {
            rows: vec![vec![1.5]],
            baseline: None,
        };
        assert!(compute_lifelong_metrics(&m).is_err());
    }
}
