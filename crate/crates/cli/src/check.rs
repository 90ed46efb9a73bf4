use std::path::PathBuf;

use clap::Args;
use pathmark_core::parse_netlist;

use crate::error::CliError;

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub netlist: PathBuf,
}

pub fn read_netlist(path: &std::path::Path) -> Result<pathmark_core::Circuit, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_netlist(&text).map_err(|diags| {
        CliError::Validation(diags.iter().map(|d| format!("{}:{d}", path.display())).collect())
    })
}

pub fn run(a: &CheckArgs) -> Result<(), CliError> {
    let c = read_netlist(&a.netlist)?;
    println!(
        "{}: ok, {} elements, {} modulators, detect {}",
        a.netlist.display(),
        c.elements().len(),
        c.eoms().len(),
        c.detects().join(", ")
    );
    Ok(())
}
