//! One function per subcommand. Every command echoes its effective
//! configuration as `#`-prefixed lines so runs are self-describing, and
//! exits nonzero through `anyhow` on the first error.

use std::env;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{bail, Context, Result};
use kgbench::bench::{
    read_manifest, read_split_questions, remove_bundle_files, write_bundle, BuildConfig,
};
use kgbench::classify::{render_histogram, type_histogram};
use kgbench::eval::{evaluate_run, read_predictions_path, EvalConfig, EvalReport};
use kgbench::kg::{
    load_graph_path, load_names_path, relabel as relabel_graph, write_graph, write_label_map,
    KnowledgeGraph,
};
use kgbench::llm::{
    GeneratorTranscript, HttpTransport, LlmGenerator, OfflineTransport, QuestionGenerator,
    TemplateGenerator, ENDPOINT_ENV, MODEL_ENV,
};
use kgbench::miner::{self, MinerConfig};

use crate::preset::{Preset, SchemeKind};
use crate::{BuildArgs, EvaluateArgs, GeneratorKind, MineArgs, RelabelArgs, SplitChoice, StatsArgs};

pub fn mine(args: MineArgs) -> Result<()> {
    let preset = Preset::resolve(args.preset);
    let config = MinerConfig {
        max_length: args.max_len.unwrap_or(preset.miner.max_length),
        min_confidence: args.min_conf.unwrap_or(preset.miner.min_confidence),
        min_head_coverage: args.min_hc.unwrap_or(preset.miner.min_head_coverage),
        min_pca_confidence: args.min_pca.unwrap_or(preset.miner.min_pca_confidence),
        allow_instantiated_atoms: args.instantiated,
        workers: args.workers,
    };
    config.validate().map_err(|reason| anyhow::anyhow!("invalid mining config: {reason}"))?;

    let graph = load_graph_path(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    let rules = miner::mine(&graph, &config);

    let header = vec![
        format!("kgbench mine {}", args.graph.display()),
        format!("preset: {}", preset.name.as_str()),
        format!("max_length: {}", config.max_length),
        format!("min_head_coverage: {}", config.min_head_coverage),
        format!("min_confidence: {}", config.min_confidence),
        format!("min_pca_confidence: {}", config.min_pca_confidence),
        format!("instantiated_atoms: {}", config.allow_instantiated_atoms),
        format!("triples: {}", graph.len()),
        format!("rules: {}", rules.len()),
        "columns: rule, support, head_coverage, confidence, pca_confidence".to_owned(),
    ];
    let out = File::create(&args.out)
        .with_context(|| format!("creating rule file {}", args.out.display()))?;
    miner::write_rules(BufWriter::new(out), &graph, &rules, &header)
        .with_context(|| format!("writing rules to {}", args.out.display()))?;

    for line in &header {
        println!("# {line}");
    }
    println!("{}", render_histogram(&type_histogram(&rules)));
    Ok(())
}

/// Holds whichever generator the flags selected; `build` borrows it as a
/// trait object.
enum Generator {
    Template(TemplateGenerator),
    Live(Box<LlmGenerator<HttpTransport>>),
    Cached(Box<LlmGenerator<OfflineTransport>>),
}

impl Generator {
    fn as_dyn(&self) -> &dyn QuestionGenerator {
        match self {
            Generator::Template(g) => g,
            Generator::Live(g) => g.as_ref(),
            Generator::Cached(g) => g.as_ref(),
        }
    }
}

fn make_generator(args: &BuildArgs) -> Result<Generator> {
    match args.generator {
        GeneratorKind::Template => Ok(Generator::Template(TemplateGenerator)),
        GeneratorKind::Llm => {
            let endpoint = env::var(ENDPOINT_ENV).ok().filter(|v| !v.is_empty());
            let cached = args.transcript.as_deref().is_some_and(Path::exists);
            if endpoint.is_none() && !cached {
                bail!(
                    "--generator llm needs {ENDPOINT_ENV} set or an existing --transcript cache"
                );
            }
            let transcript = match &args.transcript {
                Some(path) => GeneratorTranscript::open(path)
                    .with_context(|| format!("opening transcript {}", path.display()))?,
                None => GeneratorTranscript::in_memory(),
            };
            let model = args
                .model
                .clone()
                .or_else(|| env::var(MODEL_ENV).ok())
                .unwrap_or_else(|| "gpt-4".to_owned());
            if endpoint.is_some() {
                let transport = HttpTransport::from_env().context("llm transport setup")?;
                Ok(Generator::Live(Box::new(LlmGenerator::new(transport, transcript, model))))
            } else {
                Ok(Generator::Cached(Box::new(LlmGenerator::new(
                    OfflineTransport,
                    transcript,
                    model,
                ))))
            }
        }
    }
}

pub fn build(args: BuildArgs) -> Result<()> {
    // Configuration problems should surface before any heavy lifting.
    let generator = make_generator(&args)?;
    let preset = Preset::resolve(args.preset);
    let scheme = args.label_scheme.unwrap_or(preset.label_scheme);
    let config = BuildConfig {
        per_rule_limit: args.per_rule_limit.unwrap_or(preset.per_rule_limit),
        tau: args.tau.unwrap_or(preset.tau),
        seed: args.seed,
        split_ratios: args.split.unwrap_or(preset.split_ratios),
        preset: Some(preset.name.as_str().to_owned()),
        generator_name: match args.generator {
            GeneratorKind::Template => "template".to_owned(),
            GeneratorKind::Llm => "llm".to_owned(),
        },
        label_scheme: Some(scheme.as_str().to_owned()),
    };
    config.validate()?;

    let mut graph = load_graph_path(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    if let Some(names) = &args.names {
        let names = load_names_path(names)
            .with_context(|| format!("loading names {}", names.display()))?;
        graph = graph.with_names(&names);
    }
    let rules = {
        let file = File::open(&args.rules)
            .with_context(|| format!("opening rule file {}", args.rules.display()))?;
        miner::parse_rules(BufReader::new(file), &graph)
            .with_context(|| format!("parsing rules {}", args.rules.display()))?
    };

    // Relabeling rewrites the vocabulary only; entity ids stay stable, so
    // rules parsed against the original labels still apply.
    let (graph, mapping) = match scheme {
        SchemeKind::EntityId => (graph, None),
        other => {
            let (relabeled, mapping) = relabel_graph(&graph, other.to_scheme(args.seed))?;
            (relabeled, Some(mapping))
        }
    };

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;
    let outcome = (|| -> Result<kgbench::bench::Manifest> {
        let bundle = kgbench::bench::build(&graph, &rules, &config, generator.as_dyn())?;
        write_bundle(&args.out, &bundle)?;
        if let Some(mapping) = &mapping {
            let map_file = File::create(args.out.join("label_map.tsv"))?;
            write_label_map(mapping, BufWriter::new(map_file))?;
        }
        Ok(bundle.manifest)
    })();
    let manifest = match outcome {
        Ok(manifest) => manifest,
        Err(error) => {
            // Never leave a half-written bundle behind.
            let _ = remove_bundle_files(&args.out);
            let _ = std::fs::remove_file(args.out.join("label_map.tsv"));
            return Err(error);
        }
    };

    println!("# kgbench build {}", args.graph.display());
    println!("# preset: {}", preset.name.as_str());
    println!("# seed: {}", manifest.seed);
    println!("# tau: {}", manifest.tau);
    println!("# per_rule_limit: {}", manifest.per_rule_limit);
    println!(
        "# split_ratios: {},{},{}",
        manifest.split_ratios[0], manifest.split_ratios[1], manifest.split_ratios[2]
    );
    println!("# generator: {}", manifest.generator);
    println!("# label_scheme: {}", scheme.as_str());
    println!("rules            {}", manifest.rule_count);
    println!("removals         {}", manifest.removal_count);
    println!("complete         {}", manifest.complete_triples);
    println!("incomplete       {}", manifest.incomplete_triples);
    println!("questions        {}", manifest.question_count);
    println!(
        "splits           {}/{}/{}",
        manifest.split_counts[0], manifest.split_counts[1], manifest.split_counts[2]
    );
    Ok(())
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let manifest = read_manifest(&args.bundle)
        .with_context(|| format!("reading bundle {}", args.bundle.display()))?;
    let splits = read_split_questions(&args.bundle)?;
    let questions = match args.split {
        SplitChoice::Train => splits.train,
        SplitChoice::Validation => splits.validation,
        SplitChoice::Test => splits.test,
        SplitChoice::All => {
            let mut all = splits.train;
            all.extend(splits.validation);
            all.extend(splits.test);
            all
        }
    };
    if questions.is_empty() {
        bail!("split `{}` has no questions", args.split.as_str());
    }
    let predictions = read_predictions_path(&args.predictions)
        .with_context(|| format!("reading predictions {}", args.predictions.display()))?;
    let missing = questions.len().saturating_sub(predictions.len());

    let config = EvalConfig {
        split_spaces: args.split_spaces,
        skip_empty_precision: args.skip_empty_precision,
    };
    let metrics = evaluate_run(&questions, &predictions, &config)?;
    let report = EvalReport::new(metrics, &config, manifest.label_scheme.clone());

    let report_path =
        args.out.clone().unwrap_or_else(|| args.bundle.join("report.json"));
    std::fs::write(&report_path, report.to_json())
        .with_context(|| format!("writing report {}", report_path.display()))?;

    println!("# kgbench evaluate {}", args.bundle.display());
    println!("# split: {}", args.split.as_str());
    println!("# split_spaces: {}", args.split_spaces);
    println!("# skip_empty_precision: {}", args.skip_empty_precision);
    if let Some(scheme) = &manifest.label_scheme {
        println!("# label_scheme: {scheme}");
    }
    if missing > 0 {
        println!("# missing prediction rows scored zero: {missing}");
    }
    println!("# report: {}", report_path.display());
    print!("{}", report.summary());
    Ok(())
}

fn thousands(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn stats(args: StatsArgs) -> Result<()> {
    let manifest = read_manifest(&args.bundle)
        .with_context(|| format!("reading bundle {}", args.bundle.display()))?;
    let complete = load_graph_path(args.bundle.join("complete.tsv"))?;
    let incomplete = load_graph_path(args.bundle.join("incomplete.tsv"))?;
    let splits = read_split_questions(&args.bundle)?;
    let dataset = manifest.preset.as_deref().unwrap_or("bundle");
    let (train, val, test) = (splits.train.len(), splits.validation.len(), splits.test.len());
    let total = train + val + test;

    println!("# kgbench stats {}", args.bundle.display());
    println!("# seed: {}  tau: {}  split_ratios: {:?}", manifest.seed, manifest.tau, manifest.split_ratios);
    let name_width = dataset.len() + "-incomplete".len();
    println!(
        "{:name_width$}  {:>9}  {:>6}  {:>5}  {:>5}  {:>8}",
        "dataset", "#triples", "train", "val", "test", "total qs"
    );
    for (view, graph) in [("complete", &complete), ("incomplete", &incomplete)] {
        println!(
            "{:name_width$}  {:>9}  {:>6}  {:>5}  {:>5}  {:>8}",
            format!("{dataset}-{view}"),
            thousands(graph.len()),
            thousands(train),
            thousands(val),
            thousands(test),
            thousands(total),
        );
    }
    Ok(())
}

pub fn relabel(args: RelabelArgs) -> Result<()> {
    let mut graph: KnowledgeGraph = load_graph_path(&args.graph)
        .with_context(|| format!("loading graph {}", args.graph.display()))?;
    if let Some(names) = &args.names {
        let names = load_names_path(names)
            .with_context(|| format!("loading names {}", names.display()))?;
        graph = graph.with_names(&names);
    }
    let (relabeled, mapping) = relabel_graph(&graph, args.scheme.to_scheme(args.seed))?;

    let out = File::create(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    write_graph(&relabeled, BufWriter::new(out))?;
    if let Some(map_path) = &args.map {
        let map_file = File::create(map_path)
            .with_context(|| format!("creating {}", map_path.display()))?;
        write_label_map(&mapping, BufWriter::new(map_file))?;
    }

    println!("# kgbench relabel {}", args.graph.display());
    println!("# scheme: {}", args.scheme.as_str());
    if args.scheme == SchemeKind::PrivateId {
        println!("# seed: {}", args.seed);
    }
    println!("entities   {}", relabeled.entity_count());
    println!("triples    {}", relabeled.len());
    println!("written    {}", args.out.display());
    Ok(())
}
