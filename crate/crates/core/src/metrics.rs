//! Detection error trade-off, equal error rate and minimum detection cost.
//!
//! A trial is accepted when `score >= threshold`. The DET curve holds one
//! operating point per distinct score plus the accept-all (`-inf`) and
//! reject-all (`+inf`) sentinels.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcfParams {
    pub p_target: f64,
    pub c_miss: f64,
    pub c_fa: f64,
}

impl DcfParams {
    pub fn new(p_target: f64, c_miss: f64, c_fa: f64) -> Result<Self> {
        if !(p_target > 0.0 && p_target < 1.0) {
            return Err(Error::invalid(format!("p_target must be in (0, 1), got {p_target}")));
        }
        if !(c_miss > 0.0 && c_fa > 0.0) || !c_miss.is_finite() || !c_fa.is_finite() {
            return Err(Error::invalid("detection costs must be positive"));
        }
        Ok(Self { p_target, c_miss, c_fa })
    }

    /// Unit costs at the given target prior.
    pub fn with_prior(p_target: f64) -> Result<Self> {
        Self::new(p_target, 1.0, 1.0)
    }
}

impl Default for DcfParams {
    fn default() -> Self {
        Self {
            p_target: 0.05,
            c_miss: 1.0,
            c_fa: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetPoint {
    pub threshold: f64,
    pub p_miss: f64,
    pub p_fa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetCurve {
    pub points: Vec<DetPoint>,
}

pub fn det_curve(scores: &[f64], labels: &[bool]) -> Result<DetCurve> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite"));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    let (np, nn) = (n_pos as f64, n_neg as f64);
    let mut points = Vec::with_capacity(scores.len() + 2);
    points.push(DetPoint {
        threshold: f64::NEG_INFINITY,
        p_miss: 0.0,
        p_fa: 1.0,
    });
    // `below_pos` / `below_neg` count trials strictly under the current threshold.
    let (mut below_pos, mut below_neg) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        points.push(DetPoint {
            threshold,
            p_miss: below_pos as f64 / np,
            p_fa: (n_neg - below_neg) as f64 / nn,
        });
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                below_pos += 1;
            } else {
                below_neg += 1;
            }
            i += 1;
        }
    }
    points.push(DetPoint {
        threshold: f64::INFINITY,
        p_miss: 1.0,
        p_fa: 0.0,
    });
    Ok(DetCurve { points })
}

/// Equal error rate by linear interpolation at the first sign change of
/// `p_miss - p_fa` along the curve.
pub fn eer(curve: &DetCurve) -> f64 {
    let pts = &curve.points;
    for (k, p) in pts.iter().enumerate() {
        let d = p.p_miss - p.p_fa;
        if d == 0.0 {
            return p.p_miss;
        }
        if d > 0.0 {
            if k == 0 {
                return p.p_miss.min(p.p_fa);
            }
            let q = pts[k - 1];
            let dq = q.p_miss - q.p_fa;
            let t = dq / (dq - d);
            return q.p_miss + t * (p.p_miss - q.p_miss);
        }
    }
    // Unreachable for curves built by `det_curve`, which end at p_miss = 1, p_fa = 0.
    pts.last().map_or(0.0, |p| p.p_miss)
}

/// Normalized minimum detection cost and the smallest threshold attaining it.
pub fn min_dcf(curve: &DetCurve, params: &DcfParams) -> (f64, f64) {
    let norm = (params.c_miss * params.p_target).min(params.c_fa * (1.0 - params.p_target));
    let mut best = (f64::INFINITY, f64::INFINITY);
    for p in &curve.points {
        let raw = dcf_raw(p.p_miss, p.p_fa, params);
        if raw < best.0 {
            best = (raw, p.threshold);
        }
    }
    (best.0 / norm, best.1)
}

pub(crate) fn dcf_raw(p_miss: f64, p_fa: f64, params: &DcfParams) -> f64 {
    params.c_miss * params.p_target * p_miss + params.c_fa * (1.0 - params.p_target) * p_fa
}

/// EER and minDCF at each requested prior in one call.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub eer: f64,
    pub min_dcf: Vec<(DcfParams, f64)>,
}

pub fn evaluate(scores: &[f64], labels: &[bool], params: &[DcfParams]) -> Result<Report> {
    let curve = det_curve(scores, labels)?;
    Ok(Report {
        eer: eer(&curve),
        min_dcf: params.iter().map(|p| (*p, min_dcf(&curve, p).0)).collect(),
    })
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "EER={:.2}%", 100.0 * self.eer)?;
        for (p, v) in &self.min_dcf {
            write!(f, " minDCF(p={})={v:.4}", p.p_target)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(pos: &[f64], neg: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let mut s = pos.to_vec();
        s.extend_from_slice(neg);
        let mut l = vec![true; pos.len()];
        l.extend(vec![false; neg.len()]);
        (s, l)
    }

    #[test]
    fn two_trial_curve() {
        let c = det_curve(&[0.1, 0.9], &[false, true]).unwrap();
        let rates: Vec<(f64, f64)> = c.points.iter().map(|p| (p.p_miss, p.p_fa)).collect();
        assert_eq!(rates, [(0.0, 1.0), (0.0, 1.0), (0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(c.points[2].threshold, 0.9);
    }

    #[test]
    fn curve_is_monotone() {
        let (s, l) = split(&[0.3, 0.5, 0.5, 0.9], &[0.1, 0.5, 0.2]);
        let c = det_curve(&s, &l).unwrap();
        for w in c.points.windows(2) {
            assert!(w[1].threshold > w[0].threshold);
            assert!(w[1].p_miss >= w[0].p_miss);
            assert!(w[1].p_fa <= w[0].p_fa);
        }
    }

    #[test]
    fn separable_is_zero() {
        let (s, l) = split(&[0.7, 0.8, 0.95], &[0.1, 0.3, 0.69]);
        let c = det_curve(&s, &l).unwrap();
        assert!(c.points.iter().any(|p| p.p_miss == 0.0 && p.p_fa == 0.0));
        assert_eq!(eer(&c), 0.0);
        assert_eq!(min_dcf(&c, &DcfParams::default()).0, 0.0);
    }

    #[test]
    fn hand_enumerated_eer() {
        let (s, l) = split(&[0.8, 0.6, 0.4], &[0.7, 0.5, 0.3]);
        assert_eq!(eer(&det_curve(&s, &l).unwrap()), 1.0 / 3.0);
    }

    #[test]
    fn constant_scores_give_half() {
        let c = det_curve(&[0.2; 6], &[true, false, true, true, false, false]).unwrap();
        assert_eq!(eer(&c), 0.5);
    }

    #[test]
    fn reject_all_costs_one() {
        let p = DcfParams::default();
        let raw = dcf_raw(1.0, 0.0, &p);
        assert_eq!(raw, 0.05);
        // A fully inverted system cannot beat the reject-all sentinel.
        let (s, l) = split(&[0.1, 0.2], &[0.8, 0.9]);
        let (cost, thr) = min_dcf(&det_curve(&s, &l).unwrap(), &p);
        assert_eq!(cost, 1.0);
        assert_eq!(thr, f64::INFINITY);
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(det_curve(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass)));
        assert!(det_curve(&[0.1], &[true, false]).is_err());
        assert!(DcfParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn report_format() {
        let (s, l) = split(&[0.9], &[0.1]);
        let p = [DcfParams::with_prior(0.05).unwrap(), DcfParams::with_prior(0.01).unwrap()];
        let r = evaluate(&s, &l, &p).unwrap();
        assert_eq!(r.to_string(), "EER=0.00% minDCF(p=0.05)=0.0000 minDCF(p=0.01)=0.0000");
    }
}
