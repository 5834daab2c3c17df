use ftprep::circuit::{golay_latin_schedules, latin_rectangle_prep};
use ftprep::code::CssCode;
use ftprep::montecarlo::{four_ancilla_model, simulate_overhead, twelve_ancilla_model};
use ftprep::noise::NoiseModel;

fn main() -> anyhow::Result<()> {
    let code = CssCode::golay();
    let p: Vec<_> = golay_latin_schedules()
        .iter()
        .map(|s| latin_rectangle_prep(&code, s).unwrap())
        .collect();
    let noise = NoiseModel::from_p(1e-3);
    let m4 = four_ancilla_model([p[0].clone(), p[1].clone(), p[2].clone(), p[3].clone()])?;
    let e4 = simulate_overhead(&code, &m4, &noise, 400_000, 7);
    println!("steane-4: {:?}", e4);
    let m12 = twelve_ancilla_model(&p[0])?;
    let e12 = simulate_overhead(&code, &m12, &noise, 400_000, 7);
    println!("steane-12: {:?}", e12);
    Ok(())
}
