use std::fs::File;
use std::io::BufReader;

use msbench_core::modelcomp::{compare, render_cd_svg, Direction, ModelCompError, ScoreMatrix};
use serde_json::json;

use crate::args::CompareArgs;
use crate::error::{CliError, Result};
use crate::report::{write_file, Report};
use crate::Ctx;

pub fn run(ctx: &Ctx, args: &CompareArgs) -> Result<()> {
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(CliError::usage(format!("--alpha must lie in (0, 1), got {}", args.alpha)));
    }
    let direction = if args.lower_better { Direction::LowerBetter } else { Direction::HigherBetter };
    let file = File::open(&args.scores).map_err(|e| CliError::in_file(&args.scores, e))?;
    let matrix = ScoreMatrix::from_tsv(BufReader::new(file), direction)
        .map_err(|e| CliError::in_file(&args.scores, e))?;
    let cmp = compare(&matrix, args.alpha).map_err(|e| match e {
        ModelCompError::BadAlpha(_) => CliError::usage(e),
        other => CliError::in_file(&args.scores, other),
    })?;
    if let Some(svg) = &args.svg {
        write_file(svg, &render_cd_svg(&cmp))?;
    }
    let params = json!({ "alpha": args.alpha, "lower_better": args.lower_better });
    let mut report = Report::new("compare", &ctx.settings, params, &[("scores", &args.scores)])?;
    for (m, r) in cmp.models.iter().zip(&cmp.average_ranks) {
        report.aggregate(&format!("average_rank.{m}"), Some(*r));
    }
    if let Some(f) = &cmp.friedman {
        report.aggregate("friedman_statistic", Some(f.statistic));
        report.aggregate("friedman_log10_p", Some(f.log10_p));
    }
    report.set("comparison", &cmp);
    report.write(&ctx.out)
}
