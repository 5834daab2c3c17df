//! Checks candidate overlap circuits in /tmp/cands against the published
//! census and correlated-error histograms.

use ftprep::circuit::Circuit;
use ftprep::code::CssCode;
use ftprep::ft;
use std::collections::BTreeMap;

fn main() {
    let code = CssCode::golay();
    let o1_want: BTreeMap<u8, usize> = [(2u8, 16usize), (3, 14), (4, 4)].into();
    let o2_want: BTreeMap<u8, usize> = [(3u8, 493usize), (4, 400), (5, 35), (6, 2)].into();
    let dir = std::env::args().nth(1).unwrap_or_else(|| "/tmp/cands".into());
    let (mut total, mut prep_ok, mut census_ok, mut o1_ok) = (0, 0, 0, 0);
    let mut o1_seen: BTreeMap<String, usize> = BTreeMap::new();
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().map_or(true, |e| e != "txt") {
            continue;
        }
        total += 1;
        let c = Circuit::from_text(&std::fs::read_to_string(&path).unwrap()).unwrap();
        if !c.prepares_zero(&code) {
            continue;
        }
        prep_ok += 1;
        let census = c.census();
        if census.cnot != 57 || census.rest != 38 {
            continue;
        }
        census_ok += 1;
        let fp1 = ft::correlated_fingerprint(&code, &c, 1);
        *o1_seen.entry(format!("{:?}", fp1[0])).or_insert(0) += 1;
        if fp1[0] != o1_want {
            continue;
        }
        o1_ok += 1;
        let fp2 = ft::correlated_fingerprint(&code, &c, 2);
        println!("o1 MATCH {:?} o2={:?}", path.file_name().unwrap(), fp2[1]);
        if fp2[1] == o2_want {
            println!("FULL MATCH: {:?}", path);
        }
    }
    println!("total {total}, prep_ok {prep_ok}, census_ok {census_ok}, o1_ok {o1_ok}");
    let mut hist: Vec<_> = o1_seen.into_iter().collect();
    hist.sort_by_key(|(_, n)| std::cmp::Reverse(*n));
    for (k, n) in hist.iter().take(10) {
        println!("{n:5}  {k}");
    }
}
