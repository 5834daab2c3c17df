//! Quick strict-FT probe of the Steane-4 network.

use ftprep::circuit::{golay_latin_schedules, latin_rectangle_prep};
use ftprep::ft::strict_ft_check;
use ftprep::network::four_ancilla_network;
use ftprep::CssCode;
use std::time::Instant;

fn main() -> anyhow::Result<()> {
    let order: usize = std::env::args().nth(1).map(|s| s.parse().unwrap()).unwrap_or(2);
    let code = CssCode::golay();
    let preps: Vec<_> = golay_latin_schedules()
        .iter()
        .map(|s| latin_rectangle_prep(&code, s).unwrap())
        .collect();
    let net = four_ancilla_network([
        preps[0].clone(),
        preps[1].clone(),
        preps[2].clone(),
        preps[3].clone(),
    ])?;
    let t = Instant::now();
    let r = strict_ft_check(&code, &net, order);
    println!(
        "order {order}: pass={} witnesses={} max_accepted_weight={:?} in {:?}",
        r.pass,
        r.witnesses.len(),
        r.max_accepted_weight,
        t.elapsed()
    );
    for w in r.witnesses.iter().take(5) {
        println!("  {w:?}");
    }
    Ok(())
}
