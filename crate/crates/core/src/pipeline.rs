//! End-to-end segmentation of one page.

use log::debug;

use crate::blob::{
    classify, extract_blob_lines, partition_ligatures, skeletonize_and_decompose, BlobLine, LigatureContext,
    LigatureParams, Validity,
};
use crate::energy::{assign_components_detailed, AssignParams};
use crate::error::Result;
use crate::filter_bank::{build_bank, enhance, BankConfig, ResponseField};
use crate::gt::{polygons_from_labels, LineLabeling, PolygonSet};
use crate::imaging::{component_height_stats, connected_components, BinaryImage, BlobMask, HeightStats};
use crate::merge::{build_merge_graph, mst_merge, MergeGraph, MergeParams};
use crate::niblack::niblack_binarize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    MultiOriented,
    /// Filter bank restricted to the horizontal orientation.
    SingleOrientedBaseline,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineParams {
    pub bank: BankConfig,
    pub ligature: LigatureParams,
    pub merge: MergeParams,
    pub assign: AssignParams,
    pub mode: Mode,
}

impl PipelineParams {
    /// Bank settings with the mode applied.
    pub fn effective_bank(&self) -> BankConfig {
        let mut bank = self.bank.clone();
        bank.baseline_mode |= self.mode == Mode::SingleOrientedBaseline;
        bank
    }

    pub fn baseline() -> Self {
        PipelineParams {
            mode: Mode::SingleOrientedBaseline,
            ..Default::default()
        }
    }
}

/// Intermediate results kept for inspection and debug overlays.
#[derive(Debug, Clone, Default)]
pub struct StageArtifacts {
    pub height_stats: Option<HeightStats>,
    pub max_scale: f64,
    pub field: Option<ResponseField>,
    pub blob_mask: Option<BlobMask>,
    pub valid_blobs: Vec<BlobLine>,
    pub invalid_blobs: Vec<BlobLine>,
    /// Pieces of invalid blobs that survived ligature removal.
    pub decomposed: Vec<BlobLine>,
    pub removed_ligatures: Vec<BlobLine>,
    pub merge_graph: Option<MergeGraph>,
    pub merged_blobs: Vec<BlobLine>,
    /// Energy after each solver stage.
    pub sweep_energies: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub labeling: LineLabeling,
    pub polygons: PolygonSet,
    pub artifacts: StageArtifacts,
}

/// Runs enhancement, binarization, validation, decomposition, ligature
/// removal, merging and assignment in that order. A page without ink gives
/// an empty labeling.
pub fn segment_page(img: &BinaryImage, params: &PipelineParams) -> Result<Segmentation> {
    let (w, h) = (img.width(), img.height());
    let mut art = StageArtifacts::default();
    let components = connected_components(img);
    if components.is_empty() {
        return Ok(Segmentation {
            labeling: LineLabeling::empty(w, h)?,
            polygons: PolygonSet::default(),
            artifacts: art,
        });
    }
    let bank_cfg = params.effective_bank();
    bank_cfg.validate()?;
    let stats = component_height_stats(&components)?;
    let bank = build_bank(&stats, &bank_cfg)?;
    let max_scale = bank.max_scale();
    debug!(
        "{} components, mu {:.2}, sigma {:.2}, {} kernels",
        components.len(),
        stats.mu,
        stats.sigma,
        bank.len()
    );

    let field = enhance(img, &bank)?;
    let mask = niblack_binarize(
        &field,
        bank_cfg.window_for(max_scale),
        bank_cfg.niblack_k,
        bank_cfg.noise_floor,
    );
    let blobs = extract_blob_lines(&mask);

    let mut valid = Vec::new();
    let mut invalid = Vec::new();
    for b in blobs {
        match classify(&b, max_scale) {
            Validity::Valid => valid.push(b),
            Validity::Invalid => invalid.push(b),
        }
    }
    let pieces: Vec<BlobLine> = invalid.iter().flat_map(skeletonize_and_decompose).collect();
    let mut all: Vec<BlobLine> = valid.clone();
    all.extend(pieces.iter().cloned());
    let ctx = LigatureContext::new(&all, w, h);
    let (kept, removed) = partition_ligatures(pieces, &field, &ctx, &params.ligature);
    debug!(
        "{} valid, {} invalid blobs; {} pieces kept, {} ligatures removed",
        valid.len(),
        invalid.len(),
        kept.len(),
        removed.len()
    );

    let mut lines: Vec<BlobLine> = valid.iter().cloned().chain(kept.iter().cloned()).collect();
    for (i, b) in lines.iter_mut().enumerate() {
        b.id = i + 1;
    }
    let graph = build_merge_graph(&lines, img, &params.merge, max_scale);
    let merged = mst_merge(&graph, &lines);
    debug!("{} blob lines merged into {}", lines.len(), merged.len());

    let (labeling, solution) = assign_components_detailed(&components, &merged, img, &params.assign)?;
    let polygons = polygons_from_labels(&labeling);

    art.height_stats = Some(stats);
    art.max_scale = max_scale;
    art.field = Some(field);
    art.blob_mask = Some(mask);
    art.valid_blobs = valid;
    art.invalid_blobs = invalid;
    art.decomposed = kept;
    art.removed_ligatures = removed;
    art.merge_graph = Some(graph);
    art.merged_blobs = merged;
    art.sweep_energies = solution.map(|s| s.sweep_energies).unwrap_or_default();
    Ok(Segmentation {
        labeling,
        polygons,
        artifacts: art,
    })
}
