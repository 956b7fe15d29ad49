use gspam::sim::{make_scenario, Scenario};

use super::{create_dir, write_text};
use crate::args::SimulateArgs;
use crate::error::{CliError, Result};
use crate::formats::{write_dataset, write_groups, write_truth, Truth};

const BLOCK_SIZE: usize = 4;

pub fn simulate(args: &SimulateArgs) -> Result<String> {
    if !args.p.is_multiple_of(BLOCK_SIZE) {
        return Err(CliError::Usage(format!(
            "p = {} is not a multiple of {BLOCK_SIZE}, so the default blocks of {BLOCK_SIZE} \
             neighbouring covariates do not fit; use such a p, or write your own groups file \
             for the fit",
            args.p
        )));
    }
    let scenario = Scenario {
        n: args.n,
        p: args.p,
        t: args.t,
        seed: args.seed,
        replicate: args.replicate,
        block_size: BLOCK_SIZE,
        snr: args.snr.into(),
    };
    let sim = make_scenario(&scenario)?;
    create_dir(&args.out)?;
    for (name, data) in [
        ("train.csv", &sim.train),
        ("validation.csv", &sim.validation),
        ("test.csv", &sim.test),
    ] {
        let mut buf = Vec::new();
        write_dataset(&mut buf, data).expect("writing to memory");
        write_text(&args.out.join(name), std::str::from_utf8(&buf).expect("CSV is UTF-8"))?;
    }
    write_text(&args.out.join("groups.txt"), &write_groups(&sim.groups))?;
    let truth = Truth {
        support: sim.true_support.clone(),
        sigma: Some(sim.sigma),
    };
    write_text(&args.out.join("truth.txt"), &write_truth(&truth))?;
    Ok(format!(
        "wrote train.csv, validation.csv, test.csv ({} rows each, p = {}), groups.txt ({} groups) and truth.txt to {}\n",
        args.n,
        args.p,
        sim.groups.len(),
        args.out.display()
    ))
}
