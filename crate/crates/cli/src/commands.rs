use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use serde::Serialize;

use voicescreen::cohort::{make_cohort, CohortSpec};
use voicescreen::features::{
    age_correct, extract_features, group_stats, read_csv_file, write_csv_file, ExtractConfig,
    GroupStats,
};
use voicescreen::ml::{
    cross_validate, subset_search, CvConfig, EvalReport, LdaBias, MeanSd, ModelKind, ModelSpec,
    RankedSubset,
};
use voicescreen::periods::{segment_wm, segment_wm_pc, SegmentationConfig};
use voicescreen::perturbation::RapNormalization;
use voicescreen::pitch::{estimate_f0, F0Config};
use voicescreen::signal::{load_wav, write_wav};
use voicescreen::synth::{synth_voice, SynthSpec};
use voicescreen::vibrato::{compute_pvi, PviConfig};
use voicescreen::{Dataset, FeatureVector, Label, Sex, Waveform, FEATURE_NAMES};

use crate::args::*;

/// Attaches the pipeline stage to a library error.
fn stage<T>(name: &str, r: voicescreen::Result<T>) -> Result<T> {
    r.with_context(|| name.to_string())
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).context("serializing report")?;
    s.push('\n');
    Ok(s)
}

fn load(path: &Path, io: &InputArgs) -> Result<Waveform> {
    let w = stage(&format!("reading {}", path.display()), load_wav(path))?;
    if io.trim_head > 0.0 || io.trim_tail > 0.0 {
        return stage("trimming", w.trim_edges(io.trim_head, io.trim_tail));
    }
    Ok(w)
}

impl From<&PitchArgs> for F0Config {
    fn from(a: &PitchArgs) -> Self {
        F0Config {
            f_min: a.f_min,
            f_max: a.f_max,
            hop_s: a.hop,
            frame_s: a.frame,
            voicing_threshold: a.voicing_threshold,
        }
    }
}

fn seg_config(s: &SegArgs, p: &PitchArgs) -> SegmentationConfig {
    SegmentationConfig {
        refine_window_frac: s.refine_window,
        min_cycles: s.min_cycles,
        f_min: p.f_min,
        f_max: p.f_max,
        phase_pull: s.phase_pull,
    }
}

impl From<&BandArgs> for PviConfig {
    fn from(b: &BandArgs) -> Self {
        PviConfig {
            band_lo: b.band_lo,
            band_hi: b.band_hi,
            order: b.filter_order,
            win_s: b.welch_window,
            overlap: b.welch_overlap,
            remove_mean: !b.keep_mean,
        }
    }
}

pub fn synth(a: &SynthArgs) -> Result<()> {
    let spec = SynthSpec {
        f0: a.f0,
        duration_s: a.duration,
        sample_rate: a.sample_rate,
        jitter_pct: a.jitter,
        shimmer_pct: a.shimmer,
        vibrato_rate: a.vibrato_rate,
        vibrato_depth: a.vibrato_depth,
        noise_snr_db: a.snr,
        harmonics: a.harmonics,
        seed: a.seed,
    };
    let out = stage("synthesis", synth_voice(&spec))?;
    stage("writing WAV", write_wav(&a.out, &out.waveform))?;
    let t = &out.truth;
    let mut csv = String::from("cycle_index,boundary_sample,period_samples,amplitude\n");
    for (i, ((p, t0), amp)) in t
        .positions
        .iter()
        .zip(&t.periods)
        .zip(&t.amplitudes)
        .enumerate()
    {
        writeln!(csv, "{i},{p},{t0},{amp}")?;
    }
    let truth = a
        .truth
        .clone()
        .unwrap_or_else(|| with_suffix(&a.out, ".truth.csv"));
    emit(Some(&truth), &csv)?;
    info!("{} cycles written to {}", t.periods.len(), a.out.display());
    Ok(())
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.with_extension("").into_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn f0(a: &F0Args) -> Result<()> {
    let w = load(&a.input, &a.io)?;
    let c = stage("f0 estimation", estimate_f0(&w, &(&a.pitch).into()))?;
    let mut csv = String::from("time_s,f0_hz\n");
    for (i, v) in c.values.iter().enumerate() {
        writeln!(csv, "{},{v}", c.time(i))?;
    }
    emit(a.out.as_deref(), &csv)
}

pub fn segment(a: &SegmentArgs) -> Result<()> {
    let w = load(&a.input, &a.io)?;
    let c = stage("f0 estimation", estimate_f0(&w, &(&a.pitch).into()))?;
    let cfg = seg_config(&a.seg, &a.pitch);
    let seg = stage(
        "segmentation",
        match a.method {
            SegMethod::WmPc => segment_wm_pc(&w, &c, &cfg),
            SegMethod::Wm => segment_wm(&w, &c, &cfg),
        },
    )?;
    let mut csv = String::from("boundary_sample,period_samples,amplitude\n");
    for ((b, t), amp) in seg.boundaries.iter().zip(&seg.periods).zip(&seg.amplitudes) {
        writeln!(csv, "{b},{t},{amp}")?;
    }
    info!("{} cycles", seg.n_cycles());
    emit(a.out.as_deref(), &csv)
}

struct Job {
    path: PathBuf,
    id: String,
    label: Option<Label>,
    age: Option<f64>,
    sex: Option<Sex>,
}

fn parse_opt<T: std::str::FromStr>(s: Option<&str>, what: &str) -> Result<Option<T>> {
    match s.map(str::trim).filter(|s| !s.is_empty()) {
        None => Ok(None),
        Some(v) => match v.parse() {
            Ok(x) => Ok(Some(x)),
            Err(_) => bail!("invalid {what} {v:?}"),
        },
    }
}

fn jobs(a: &ExtractArgs) -> Result<Vec<Job>> {
    if let Some(m) = &a.manifest {
        let base = m.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut rdr =
            csv::Reader::from_path(m).with_context(|| format!("reading {}", m.display()))?;
        let mut out = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.with_context(|| format!("manifest row {}", row + 1))?;
            let path = base.join(rec.get(0).unwrap_or_default());
            let id = match rec.get(1).filter(|s| !s.is_empty()) {
                Some(s) => s.to_string(),
                None => stem(&path),
            };
            out.push(Job {
                id,
                label: parse_opt(rec.get(2), "label")
                    .with_context(|| format!("manifest row {}", row + 1))?,
                age: parse_opt(rec.get(3), "age")
                    .with_context(|| format!("manifest row {}", row + 1))?,
                sex: parse_opt(rec.get(4), "sex")
                    .with_context(|| format!("manifest row {}", row + 1))?,
                path,
            });
        }
        return Ok(out);
    }
    let (label, age, sex) = (
        parse_opt(a.label.as_deref(), "label")?,
        a.age,
        parse_opt(a.sex.as_deref(), "sex")?,
    );
    Ok(a.input
        .iter()
        .map(|p| Job {
            path: p.clone(),
            id: stem(p),
            label,
            age,
            sex,
        })
        .collect())
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn extract_one(job: &Job, a: &ExtractArgs, cfg: &ExtractConfig) -> Result<FeatureVector> {
    let w = load(&job.path, &a.io)?;
    let e = extract_features(&w, cfg)
        .with_context(|| format!("feature extraction for {}", job.path.display()))?;
    info!(
        "{}: {} cycles, mean f0 {:.1} Hz",
        job.id, e.n_cycles, e.mean_f0
    );
    Ok(FeatureVector {
        id: job.id.clone(),
        label: job.label,
        age: job.age,
        sex: job.sex,
        features: e.features.to_vec(),
    })
}

pub fn extract(a: &ExtractArgs) -> Result<()> {
    let cfg = ExtractConfig {
        f0: (&a.pitch).into(),
        segmentation: seg_config(&a.seg, &a.pitch),
        pvi: (&a.band).into(),
        rap: match a.rap {
            RapMode::AsPrinted => RapNormalization::AsPrinted,
            RapMode::Classical => RapNormalization::Classical,
        },
    };
    let jobs = jobs(a)?;
    if jobs.is_empty() {
        bail!("no recordings to process");
    }
    #[cfg(feature = "parallel")]
    let rows: Vec<Result<FeatureVector>> = {
        use rayon::prelude::*;
        jobs.par_iter().map(|j| extract_one(j, a, &cfg)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Result<FeatureVector>> = jobs.iter().map(|j| extract_one(j, a, &cfg)).collect();
    let samples = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let d = stage("building dataset", Dataset::standard(samples))?;
    stage("writing features", write_csv_file(&d, &a.out))
}

#[derive(Serialize)]
struct PviRecord {
    pvi: f64,
    band_lo: f64,
    band_hi: f64,
    n_segments: usize,
}

pub fn pvi(a: &PviArgs) -> Result<()> {
    let w = load(&a.input, &a.io)?;
    let c = stage("f0 estimation", estimate_f0(&w, &(&a.pitch).into()))?;
    let r = stage("PVI", compute_pvi(&c, &(&a.band).into()))?;
    if let Some(p) = &a.spectrum {
        let mut csv = String::from("freq_hz,amplitude\n");
        for (f, v) in r.spectrum.frequencies.iter().zip(&r.spectrum.amplitudes) {
            writeln!(csv, "{f},{v}")?;
        }
        emit(Some(p), &csv)?;
    }
    let rec = PviRecord {
        pvi: r.pvi,
        band_lo: r.band_lo,
        band_hi: r.band_hi,
        n_segments: r.spectrum.n_segments,
    };
    emit(a.out.as_deref(), &to_json(&rec)?)
}

fn read_features(p: &Path) -> Result<Dataset> {
    stage(&format!("reading {}", p.display()), read_csv_file(p))
}

pub fn stats(a: &StatsArgs) -> Result<()> {
    let d = read_features(&a.features)?;
    let cols = match &a.subset {
        Some(s) => stage("parsing subset", d.parse_subset(s))?,
        None => (0..d.dim()).collect(),
    };
    let all = cols
        .iter()
        .map(|&j| stage("group statistics", group_stats(&d, j)))
        .collect::<Result<Vec<GroupStats>>>()?;
    if let Some(p) = &a.kde {
        let mut csv = String::from("feature,x,hc_density,als_density\n");
        for g in &all {
            for (i, x) in g.grid.iter().enumerate() {
                writeln!(
                    csv,
                    "{},{x},{},{}",
                    g.feature, g.hc.density[i], g.als.density[i]
                )?;
            }
        }
        emit(Some(p), &csv)?;
    }
    // densities live in the CSV; the JSON keeps the summaries
    let mut json = serde_json::to_value(&all).context("serializing statistics")?;
    for g in json.as_array_mut().into_iter().flatten() {
        if let Some(obj) = g.as_object_mut() {
            obj.remove("grid");
            for group in ["hc", "als"] {
                if let Some(s) = obj.get_mut(group).and_then(|v| v.as_object_mut()) {
                    s.remove("density");
                }
            }
        }
    }
    emit(a.out.as_deref(), &to_json(&json)?)
}

pub fn age_correct_cmd(a: &AgeCorrectArgs) -> Result<()> {
    let d = read_features(&a.features)?;
    let c = stage("age correction", age_correct(&d))?;
    stage("writing features", write_csv_file(&c, &a.out))
}

fn model_spec(e: &EvalArgs) -> ModelSpec {
    match e.model {
        ModelChoice::Lda => ModelSpec {
            lda_bias: match e.lda_bias {
                BiasChoice::Prior => LdaBias::Prior,
                BiasChoice::Midpoint => LdaBias::Midpoint,
            },
            ..ModelSpec::lda()
        },
        ModelChoice::Knn => ModelSpec {
            k_neighbors: e.k,
            ..ModelSpec::knn()
        },
    }
}

fn cv_config(e: &EvalArgs) -> CvConfig {
    CvConfig {
        folds: e.folds,
        repetitions: e.repeats,
        seed: e.seed,
        stratified: !e.unstratified,
    }
}

fn model_name(m: &ModelSpec) -> &'static str {
    match m.kind {
        ModelKind::Lda => "LDA",
        ModelKind::Knn => "k-NN",
    }
}

fn pm(m: Option<&MeanSd>) -> String {
    m.map_or_else(|| "n/a".into(), |m| format!("{:.1} ± {:.1}", m.mean, m.sd))
}

fn table_header() -> String {
    format!(
        "{:<6} {:<28} {:>6} {:>12} {:>12} {:>12}\n",
        "Model", "Features", "R_avg", "Acc", "Sens", "Spec"
    )
}

fn table_row(model: &str, names: &str, r: &EvalReport) -> String {
    format!(
        "{:<6} {:<28} {:>6} {:>12} {:>12} {:>12}\n",
        model,
        names,
        r.r_avg.map_or_else(|| "n/a".into(), |v| format!("{v:.1}")),
        pm(Some(&r.acc)),
        pm(r.sens.as_ref()),
        pm(r.spec.as_ref()),
    )
}

#[derive(Serialize)]
struct ClassifyReport<'a> {
    model: &'a ModelSpec,
    cv: CvConfig,
    features: Vec<&'a str>,
    n_samples: usize,
    n_als: usize,
    n_hc: usize,
    report: &'a EvalReport,
}

pub fn classify(a: &ClassifyArgs) -> Result<()> {
    let d = read_features(&a.eval.features)?;
    let subset = match &a.subset {
        Some(s) => stage("parsing subset", d.parse_subset(s))?,
        None => (0..d.dim()).collect(),
    };
    let model = model_spec(&a.eval);
    let cfg = cv_config(&a.eval);
    let r = stage(
        "cross-validation",
        cross_validate(&d, &model, &subset, &cfg),
    )?;
    let names: Vec<&str> = subset
        .iter()
        .map(|&j| d.feature_names()[j].as_str())
        .collect();
    let (n_als, n_hc) = d.class_counts();
    if let Some(p) = &a.eval.json {
        let rep = ClassifyReport {
            model: &model,
            cv: cfg,
            features: names.clone(),
            n_samples: d.len(),
            n_als,
            n_hc,
            report: &r,
        };
        emit(Some(p), &to_json(&rep)?)?;
    }
    let mut out = table_header();
    out += &table_row(model_name(&model), &names.join(","), &r);
    if r.undefined_sens + r.undefined_spec > 0 {
        writeln!(
            out,
            "({} repetitions without ALS test cases, {} without HC test cases)",
            r.undefined_sens, r.undefined_spec
        )?;
    }
    emit(None, &out)
}

#[derive(Serialize)]
struct SearchReport<'a> {
    model: &'a ModelSpec,
    cv: CvConfig,
    n_subsets: usize,
    ranked: &'a [RankedSubset],
}

pub fn search(a: &SearchArgs) -> Result<()> {
    let d = read_features(&a.eval.features)?;
    let model = model_spec(&a.eval);
    let cfg = cv_config(&a.eval);
    let ranked = stage("subset search", subset_search(&d, &model, &cfg))?;
    if let Some(p) = &a.eval.json {
        let rep = SearchReport {
            model: &model,
            cv: cfg,
            n_subsets: ranked.len(),
            ranked: &ranked,
        };
        emit(Some(p), &to_json(&rep)?)?;
    }
    let mut out = table_header();
    for r in ranked.iter().take(a.top) {
        out += &table_row(model_name(&model), &r.names.join(","), &r.report);
    }
    emit(None, &out)
}

pub fn cohort(a: &CohortArgs) -> Result<()> {
    let informative = a
        .informative
        .split(',')
        .map(|s| {
            let s = s.trim();
            FEATURE_NAMES
                .iter()
                .position(|n| n.eq_ignore_ascii_case(s))
                .with_context(|| format!("unknown feature {s:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = CohortSpec {
        n_healthy: a.n_healthy,
        n_als: a.n_als,
        separation: a.separation,
        informative,
        ..Default::default()
    };
    let d = stage("cohort generation", make_cohort(&spec, a.seed))?;
    stage("writing features", write_csv_file(&d, &a.out))
}
