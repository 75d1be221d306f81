//! IU evaluation of predicted text-line polygons against ground truth.
//!
//! Only foreground pixels count. Lines are paired greedily by descending IU
//! (intersection over union of their foreground pixels), one-to-one. Pixel
//! IU pools the per-line TP/FP/FN counts over the page; line IU counts
//! lines whose precision and recall both reach the threshold.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gt::PolygonSet;
use crate::imaging::BinaryImage;

/// Line precision and recall at or above this value make a line correct.
pub const LINE_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchPair {
    /// Index into the ground-truth polygons (line `gt + 1`).
    pub gt: usize,
    /// Index into the predicted polygons.
    pub pred: usize,
    /// Foreground pixels inside both polygons.
    pub intersection: u64,
    /// Foreground pixels inside either polygon.
    pub union: u64,
    pub iu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchTable {
    pub pairs: Vec<MatchPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    /// Foreground pixel count of each ground-truth line.
    pub gt_fg: Vec<u64>,
    /// Foreground pixel count of each predicted line.
    pub pred_fg: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PageScores {
    pub pixel_iu: f64,
    pub line_iu: f64,
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub cl: u64,
    pub ml: u64,
    pub el: u64,
}

/// Foreground pixel counts per line and per (gt, pred) pair.
fn foreground_counts(gt: &PolygonSet, pred: &PolygonSet, img: &BinaryImage) -> (Vec<u64>, Vec<u64>, Vec<Vec<u64>>) {
    let (w, h) = (img.width(), img.height());
    let gm = gt.masks(w, h);
    let pm = pred.masks(w, h);
    let mut gt_fg = vec![0u64; gm.len()];
    let mut pred_fg = vec![0u64; pm.len()];
    let mut inter = vec![vec![0u64; pm.len()]; gm.len()];
    let mut gs = Vec::new();
    let mut ps = Vec::new();
    for (i, &fg) in img.bits().iter().enumerate() {
        if !fg {
            continue;
        }
        gs.clear();
        ps.clear();
        gs.extend((0..gm.len()).filter(|&g| gm[g][i]));
        ps.extend((0..pm.len()).filter(|&p| pm[p][i]));
        for &g in &gs {
            gt_fg[g] += 1;
            for &p in &ps {
                inter[g][p] += 1;
            }
        }
        for &p in &ps {
            pred_fg[p] += 1;
        }
    }
    (gt_fg, pred_fg, inter)
}

/// `a.intersection / a.union` against `b`'s, exactly.
fn cmp_iu(a: &MatchPair, b: &MatchPair) -> Ordering {
    (a.intersection as u128 * b.union as u128).cmp(&(b.intersection as u128 * a.union as u128))
}

/// Greedy one-to-one matching by descending IU; ties go to the lower gt
/// index, then the lower pred index. Pairs sharing no foreground never match.
pub fn match_pairs(gt: &PolygonSet, pred: &PolygonSet, img: &BinaryImage) -> MatchTable {
    let (gt_fg, pred_fg, inter) = foreground_counts(gt, pred, img);
    let mut cands = Vec::new();
    for (g, row) in inter.iter().enumerate() {
        for (p, &i) in row.iter().enumerate() {
            if i > 0 {
                let union = gt_fg[g] + pred_fg[p] - i;
                cands.push(MatchPair {
                    gt: g,
                    pred: p,
                    intersection: i,
                    union,
                    iu: i as f64 / union as f64,
                });
            }
        }
    }
    cands.sort_by(|a, b| cmp_iu(b, a).then(a.gt.cmp(&b.gt)).then(a.pred.cmp(&b.pred)));
    let mut gt_used = vec![false; gt_fg.len()];
    let mut pred_used = vec![false; pred_fg.len()];
    let mut pairs = Vec::new();
    for c in cands {
        if !gt_used[c.gt] && !pred_used[c.pred] {
            gt_used[c.gt] = true;
            pred_used[c.pred] = true;
            pairs.push(c);
        }
    }
    MatchTable {
        pairs,
        unmatched_gt: (0..gt_fg.len()).filter(|&g| !gt_used[g]).collect(),
        unmatched_pred: (0..pred_fg.len()).filter(|&p| !pred_used[p]).collect(),
        gt_fg,
        pred_fg,
    }
}

/// Page pixel IU with its TP, FP and FN; 1 when there is nothing to count.
pub fn pixel_iu(table: &MatchTable) -> (f64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for p in &table.pairs {
        tp += p.intersection;
        fp += table.pred_fg[p.pred] - p.intersection;
        fn_ += table.gt_fg[p.gt] - p.intersection;
    }
    fn_ += table.unmatched_gt.iter().map(|&g| table.gt_fg[g]).sum::<u64>();
    fp += table.unmatched_pred.iter().map(|&p| table.pred_fg[p]).sum::<u64>();
    let denom = tp + fp + fn_;
    let iu = if denom == 0 { 1.0 } else { tp as f64 / denom as f64 };
    (iu, tp, fp, fn_)
}

/// Page line IU with its CL, ML and EL counts; 1 when there are no lines.
/// A matched pair whose recall and precision are both below the threshold
/// counts as missed and as extra.
pub fn line_iu(table: &MatchTable, threshold: f64) -> (f64, u64, u64, u64) {
    let (mut cl, mut ml, mut el) = (0, 0, 0);
    for p in &table.pairs {
        let recall_ok = p.intersection as f64 >= threshold * table.gt_fg[p.gt] as f64;
        let precision_ok = p.intersection as f64 >= threshold * table.pred_fg[p.pred] as f64;
        if recall_ok && precision_ok {
            cl += 1;
        }
        if !recall_ok {
            ml += 1;
        }
        if !precision_ok {
            el += 1;
        }
    }
    ml += table.unmatched_gt.len() as u64;
    el += table.unmatched_pred.len() as u64;
    let denom = cl + ml + el;
    let iu = if denom == 0 { 1.0 } else { cl as f64 / denom as f64 };
    (iu, cl, ml, el)
}

pub fn scores_from_table(table: &MatchTable, threshold: f64) -> PageScores {
    let (pixel_iu, tp, fp, fn_) = pixel_iu(table);
    let (line_iu, cl, ml, el) = line_iu(table, threshold);
    PageScores {
        pixel_iu,
        line_iu,
        tp,
        fp,
        fn_,
        cl,
        ml,
        el,
    }
}

pub fn evaluate_page(gt: &PolygonSet, pred: &PolygonSet, img: &BinaryImage, threshold: f64) -> PageScores {
    scores_from_table(&match_pairs(gt, pred, img), threshold)
}

/// Unweighted means of per-page pixel IU and line IU.
pub fn dataset_means(pages: &[PageScores]) -> Result<(f64, f64)> {
    if pages.is_empty() {
        return Err(Error::Domain("dataset means need at least one page".into()));
    }
    let n = pages.len() as f64;
    Ok((
        pages.iter().map(|p| p.pixel_iu).sum::<f64>() / n,
        pages.iter().map(|p| p.line_iu).sum::<f64>() / n,
    ))
}

/// Per-page CSV with header `page,pixel_iu,line_iu,tp,fp,fn,cl,ml,el`.
pub fn report_csv(rows: &[(String, PageScores)]) -> String {
    let mut s = String::from("page,pixel_iu,line_iu,tp,fp,fn,cl,ml,el\n");
    for (name, p) in rows {
        let _ = writeln!(
            s,
            "{},{:.6},{:.6},{},{},{},{},{},{}",
            name, p.pixel_iu, p.line_iu, p.tp, p.fp, p.fn_, p.cl, p.ml, p.el
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(pairs: &[(u64, u64, u64)]) -> MatchTable {
        // (intersection, gt_fg, pred_fg)
        MatchTable {
            pairs: pairs
                .iter()
                .enumerate()
                .map(|(i, &(x, g, p))| MatchPair {
                    gt: i,
                    pred: i,
                    intersection: x,
                    union: g + p - x,
                    iu: x as f64 / (g + p - x) as f64,
                })
                .collect(),
            unmatched_gt: vec![],
            unmatched_pred: vec![],
            gt_fg: pairs.iter().map(|p| p.1).collect(),
            pred_fg: pairs.iter().map(|p| p.2).collect(),
        }
    }

    #[test]
    fn pixel_iu_substitution() {
        let t = table(&[(80, 90, 90)]);
        let (iu, tp, fp, fn_) = pixel_iu(&t);
        assert_eq!((tp, fp, fn_), (80, 10, 10));
        assert!((iu - 0.8).abs() < 1e-12);
    }

    #[test]
    fn line_classes() {
        // precision 0.8 recall 0.7 -> missed; precision 0.7 recall 0.8 -> extra
        let t = table(&[(56, 80, 70), (56, 70, 80), (75, 100, 100)]);
        let (_, cl, ml, el) = line_iu(&t, LINE_THRESHOLD);
        assert_eq!((cl, ml, el), (1, 1, 1));
    }

    #[test]
    fn iu_half() {
        let img = BinaryImage::from_fn(60, 1, |_, _| true).unwrap();
        let gt = PolygonSet::new(vec![vec![(0, 0), (44, 0)]]);
        let pred = PolygonSet::new(vec![vec![(15, 0), (59, 0)]]);
        let t = match_pairs(&gt, &pred, &img);
        assert_eq!(t.pairs[0].intersection, 30);
        assert_eq!(t.pairs[0].union, 60);
        assert_eq!(t.pairs[0].iu, 0.5);
    }

    #[test]
    fn empty_and_disjoint() {
        let img = BinaryImage::from_fn(10, 10, |_, _| true).unwrap();
        let none = PolygonSet::default();
        let s = evaluate_page(&none, &none, &img, LINE_THRESHOLD);
        assert_eq!((s.pixel_iu, s.line_iu), (1.0, 1.0));
        let a = PolygonSet::new(vec![vec![(0, 0), (2, 0), (2, 2)]]);
        let b = PolygonSet::new(vec![vec![(5, 5), (8, 5), (8, 8)]]);
        let t = match_pairs(&a, &b, &img);
        assert!(t.pairs.is_empty());
        assert_eq!((t.unmatched_gt.len(), t.unmatched_pred.len()), (1, 1));
        let s = evaluate_page(&a, &none, &img, LINE_THRESHOLD);
        assert_eq!(s.pixel_iu, 0.0);
    }

    #[test]
    fn means() {
        let p = |a, b| PageScores {
            pixel_iu: a,
            line_iu: b,
            ..Default::default()
        };
        let (x, y) = dataset_means(&[p(0.8, 0.6), p(0.6, 0.4)]).unwrap();
        assert!((x - 0.7).abs() < 1e-12 && (y - 0.5).abs() < 1e-12);
        assert!(dataset_means(&[]).is_err());
    }
}
