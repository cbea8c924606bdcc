use super::config::RunConfig;
use super::logistic::fit_logistic4;
use super::manifest::{load_manifest, MosConvention};
use super::report::{emit_report, CorrelationReport};
use super::stats::{kendall_tau_b, pearson, spearman};
use crate::backbone::load_backbone;
use crate::pipeline::{check_mode, score_batch, ImageSource};
use crate::{BackboneSession, BackboneSpec, Error, Result, ScoreRequest};

/// Loads the backbone named by `cfg` and evaluates every perturbation.
pub fn evaluate(cfg: &RunConfig) -> Result<Vec<CorrelationReport>> {
    check_mode(cfg.mode, &cfg.measure)?;
    let spec = BackboneSpec::from_file(&cfg.backbone_spec)?;
    let session = load_backbone(&spec)?;
    evaluate_with(&session, cfg)
}

/// Evaluates `cfg` on an already loaded backbone, one report per
/// perturbation in the order they are listed.
///
/// Distances are negated before correlating against higher-is-better MOS, so
/// a good metric yields positive correlations under either convention.
pub fn evaluate_with(session: &BackboneSession, cfg: &RunConfig) -> Result<Vec<CorrelationReport>> {
    cfg.validate()?;
    check_mode(cfg.mode, &cfg.measure)?;
    let manifest = load_manifest(&cfg.manifest)?;
    let dataset = cfg.dataset_name();
    let sign = match manifest.convention {
        MosConvention::HigherBetter => -1.0,
        MosConvention::LowerBetter => 1.0,
    };

    let mut reports = Vec::with_capacity(cfg.perturbations.len());
    for &perturbation in &cfg.perturbations {
        let transform = cfg.params.transform(perturbation);
        let requests: Vec<ScoreRequest> = manifest
            .samples
            .iter()
            .map(|s| {
                ScoreRequest::new(
                    ImageSource::File(s.ref_path.clone()),
                    ImageSource::File(s.dist_path.clone()),
                    cfg.mode,
                    cfg.measure,
                )
                .with_transform(transform)
            })
            .collect();
        let results = score_batch(session, &requests, cfg.workers);

        let mut scores = Vec::with_capacity(results.len());
        let mut mos = Vec::with_capacity(results.len());
        let mut first_error = None;
        let mut errors = 0;
        for (sample, result) in manifest.samples.iter().zip(results) {
            match result {
                Ok(score) => {
                    scores.push(sign * score.value);
                    mos.push(sample.mos);
                }
                Err(e) => {
                    log::warn!(
                        "{perturbation}: {} vs {}: {e}",
                        sample.ref_path.display(),
                        sample.dist_path.display()
                    );
                    errors += 1;
                    first_error.get_or_insert(e);
                }
            }
        }
        if scores.is_empty() {
            if let Some(e) = first_error {
                return Err(e);
            }
        }
        if scores.len() < 3 {
            return Err(Error::DegenerateInput(format!(
                "{perturbation}: only {} scorable pairs",
                scores.len()
            )));
        }

        let plcc = if cfg.logistic_fit {
            match fit_logistic4(&scores, &mos) {
                Ok(mapped) => pearson(&mapped, &mos)?,
                Err(e) => {
                    log::warn!("{perturbation}: {e}; reporting PLCC on raw scores");
                    pearson(&scores, &mos)?
                }
            }
        } else {
            pearson(&scores, &mos)?
        };
        reports.push(CorrelationReport {
            dataset: dataset.clone(),
            backbone: session.spec().name.clone(),
            mode: cfg.mode.to_string(),
            measure: cfg.measure.kind.to_string(),
            perturbation,
            n: scores.len(),
            plcc,
            srcc: spearman(&scores, &mos)?,
            krcc: kendall_tau_b(&scores, &mos)?,
            errors,
        });
    }
    Ok(reports)
}

/// Evaluates `cfg` and writes the report to `cfg.output`.
pub fn run(cfg: &RunConfig) -> Result<Vec<CorrelationReport>> {
    let reports = evaluate(cfg)?;
    emit_report(&reports, &cfg.output, cfg.report_format())?;
    Ok(reports)
}
