//! Error metrics and per-model, per-split reports.

use cauchynet::data::{ScalerState, SplitDataset};
use cauchynet::{Error, Trainable};

pub fn check_pairs(preds: &[f64], truths: &[f64]) -> cauchynet::Result<()> {
    if preds.len() != truths.len() {
        return Err(Error::LengthMismatch(preds.len(), truths.len()));
    }
    if preds.is_empty() {
        return Err(Error::InvalidArgument("metrics need at least one prediction".into()));
    }
    Ok(())
}

pub fn metric_mse(preds: &[f64], truths: &[f64]) -> cauchynet::Result<f64> {
    check_pairs(preds, truths)?;
    Ok(preds.iter().zip(truths).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / preds.len() as f64)
}

pub fn metric_mae(preds: &[f64], truths: &[f64]) -> cauchynet::Result<f64> {
    check_pairs(preds, truths)?;
    Ok(preds.iter().zip(truths).map(|(p, t)| (p - t).abs()).sum::<f64>() / preds.len() as f64)
}

/// One model output on one sample, in the target's original units.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub split: &'static str,
    pub x: Vec<f64>,
    pub y_true: f64,
    pub y_pred: f64,
    /// Imaginary output part, on the same scale as `y_pred`.
    pub e_pred: f64,
}

impl Prediction {
    pub fn abs_err(&self) -> f64 {
        (self.y_pred - self.y_true).abs()
    }

    pub fn signed_err(&self) -> f64 {
        self.y_pred - self.y_true
    }
}

/// Predict every sample of `raw` with a model trained on scaled targets.
///
/// `raw` must list the same samples in the same order as the scaled set the
/// model was trained on.
pub fn predict_all<M: Trainable>(
    model: &M,
    raw: &SplitDataset,
    scaler: &ScalerState,
) -> cauchynet::Result<Vec<Prediction>> {
    let gain = scaler.gain();
    let mut out = Vec::with_capacity(raw.len());
    for (split, samples) in raw.splits() {
        for s in samples {
            let (y, e) = model.predict_pair(&s.x)?;
            out.push(Prediction { split, x: s.x.clone(), y_true: s.y, y_pred: scaler.invert(y), e_pred: e / gain });
        }
    }
    Ok(out)
}

/// Predict the training mean everywhere.
pub fn predict_constant(raw: &SplitDataset, value: f64) -> Vec<Prediction> {
    raw.splits()
        .into_iter()
        .flat_map(|(split, samples)| {
            samples
                .iter()
                .map(move |s| Prediction { split, x: s.x.clone(), y_true: s.y, y_pred: value, e_pred: 0.0 })
        })
        .collect()
}

/// `split,x0[,x1..],y_true,y_pred,e_pred,abs_err`
pub fn predictions_csv(preds: &[Prediction], inputs: usize) -> String {
    let mut out = String::from("split,");
    for i in 0..inputs {
        out += &format!("x{i},");
    }
    out += "y_true,y_pred,e_pred,abs_err\n";
    for p in preds {
        out += p.split;
        for x in &p.x {
            out += &format!(",{x}");
        }
        out += &format!(",{},{},{},{}\n", p.y_true, p.y_pred, p.e_pred, p.abs_err());
    }
    out
}

/// `x0[,x1..],y_true,y_pred,signed_err` over the test (withheld) split.
pub fn imputation_csv(preds: &[Prediction], inputs: usize) -> String {
    let mut out = String::new();
    for i in 0..inputs {
        out += &format!("x{i},");
    }
    out += "y_true,y_pred,signed_err\n";
    for p in preds.iter().filter(|p| p.split == "test") {
        for x in &p.x {
            out += &format!("{x},");
        }
        out += &format!("{},{},{}\n", p.y_true, p.y_pred, p.signed_err());
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub model: String,
    pub split: String,
    pub n: usize,
    pub mse: f64,
    pub mae: f64,
    pub mean_abs_imag: f64,
    /// Per-sample absolute errors, in sample order.
    pub abs_errors: Vec<f64>,
    /// Complex parameter count; `None` for real-valued models.
    pub param_count_complex: Option<usize>,
    pub param_count_real: usize,
    /// Training wall time, when recorded.
    pub wall_ms: Option<f64>,
}

impl MetricsReport {
    /// Reports for each non-empty split of `preds`.
    pub fn from_predictions(
        model: &str,
        preds: &[Prediction],
        param_count_complex: Option<usize>,
        param_count_real: usize,
        wall_ms: Option<f64>,
    ) -> cauchynet::Result<Vec<MetricsReport>> {
        let mut reports = Vec::new();
        for split in ["train", "val", "test"] {
            let rows: Vec<&Prediction> = preds.iter().filter(|p| p.split == split).collect();
            if rows.is_empty() {
                continue;
            }
            let y_pred: Vec<f64> = rows.iter().map(|p| p.y_pred).collect();
            let y_true: Vec<f64> = rows.iter().map(|p| p.y_true).collect();
            let report = MetricsReport {
                model: model.to_string(),
                split: split.to_string(),
                n: rows.len(),
                mse: metric_mse(&y_pred, &y_true)?,
                mae: metric_mae(&y_pred, &y_true)?,
                mean_abs_imag: rows.iter().map(|p| p.e_pred.abs()).sum::<f64>() / rows.len() as f64,
                abs_errors: rows.iter().map(|p| p.abs_err()).collect(),
                param_count_complex,
                param_count_real,
                wall_ms,
            };
            report.check()?;
            reports.push(report);
        }
        Ok(reports)
    }

    /// `mse >= 0`, `mae >= 0`, `mae^2 <= mse` up to rounding.
    pub fn check(&self) -> cauchynet::Result<()> {
        if !self.mse.is_finite() || !self.mae.is_finite() {
            return Err(Error::NonFinite(format!("{} {} metrics", self.model, self.split)));
        }
        let slack = 1e-12 * self.mse.max(f64::MIN_POSITIVE);
        if self.mse < 0.0 || self.mae < 0.0 || self.mae * self.mae > self.mse + slack {
            return Err(Error::InvalidArgument(format!(
                "inconsistent metrics for {} {}: mse {} mae {}",
                self.model, self.split, self.mse, self.mae
            )));
        }
        Ok(())
    }
}

pub fn metrics_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model,split,n,mse,mae,mean_abs_imag,param_count_complex,param_count_real,wall_ms\n");
    for r in reports {
        let complex = r.param_count_complex.map(|c| c.to_string()).unwrap_or_default();
        let wall = r.wall_ms.map(|w| format!("{w:.3}")).unwrap_or_default();
        out += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.model, r.split, r.n, r.mse, r.mae, r.mean_abs_imag, complex, r.param_count_real, wall
        );
    }
    out
}

/// `model,split,index,abs_err` for box plots.
pub fn errors_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("model,split,index,abs_err\n");
    for r in reports {
        for (i, e) in r.abs_errors.iter().enumerate() {
            out += &format!("{},{},{i},{e}\n", r.model, r.split);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        assert_eq!(metric_mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(metric_mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(metric_mse(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), 5.0);
        assert_eq!(metric_mae(&[1.0, 3.0], &[0.0, 0.0]).unwrap(), 2.0);
        assert_eq!(metric_mse(&[2.5], &[2.0]).unwrap(), 0.25);
        assert_eq!(metric_mae(&[2.5], &[2.0]).unwrap(), 0.5);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(metric_mse(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch(1, 2))));
        assert!(matches!(metric_mae(&[1.0, 2.0], &[]), Err(Error::LengthMismatch(2, 0))));
        assert!(metric_mse(&[], &[]).is_err());
    }

    #[test]
    fn report_invariant() {
        let preds: Vec<Prediction> = [0.0, 1.0, -3.0, 0.5]
            .iter()
            .enumerate()
            .map(|(i, &e)| Prediction { split: "test", x: vec![i as f64], y_true: 1.0, y_pred: 1.0 + e, e_pred: 0.0 })
            .collect();
        let r = MetricsReport::from_predictions("m", &preds, None, 3, None).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].n, 4);
        assert!(r[0].mae * r[0].mae <= r[0].mse);
        assert_eq!(r[0].abs_errors, vec![0.0, 1.0, 3.0, 0.5]);
        let csv = metrics_csv(&r);
        assert!(csv.lines().nth(1).unwrap().starts_with("m,test,4,"));
        assert!(csv.lines().nth(1).unwrap().ends_with(",,3,"));
    }
}
