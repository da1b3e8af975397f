//! Loads a hardware model from TOML and reports broken constraints.

use paircc::hw::{validate_model, HardwareModel};

const MODEL: &str = r#"
width = 2
linear_alus = 2
banks = 1
regs_per_bank = 1024
read_ports = 2
write_ports = 1
fifo = { present = false }
latency = { long = 38, short = 8 }
"#;

fn main() -> anyhow::Result<()> {
    let m: HardwareModel = toml::from_str(MODEL)?;
    for v in validate_model(&m) {
        println!("{v}");
    }
    let ok = HardwareModel::from_toml(&HardwareModel::with_fifo().to_toml())?;
    println!("fingerprint {:016x}", ok.fingerprint());
    print!("{}", ok.to_toml());
    Ok(())
}
