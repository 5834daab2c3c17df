//! Prints census and correlated-error fingerprints for circuit files.

use ftprep::circuit::Circuit;
use ftprep::ft::correlated_fingerprint;
use ftprep::CssCode;

fn main() -> anyhow::Result<()> {
    let code = CssCode::golay();
    for path in std::env::args().skip(1) {
        let c = Circuit::from_text(&std::fs::read_to_string(&path)?)?;
        let fp = correlated_fingerprint(&code, &c, 2);
        println!(
            "{path} prep={} rest={} o1={:?} o2={:?}",
            c.prepares_zero(&code),
            c.census().rest,
            fp[0],
            fp[1]
        );
    }
    Ok(())
}
