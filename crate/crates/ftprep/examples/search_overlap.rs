//! Randomized search for a 57-CNOT seven-round overlap preparation circuit
//! whose correlated-error fingerprint matches the published first- and
//! second-order histograms.
//!
//! In the systematic presentation the 12 target qubits need 77 row entries in
//! total. The circuit is built round by round: a direct CNOT c -> t delivers
//! entry c to target t, and a copy CNOT h -> t delivers the entire current
//! content of target h, provided it fits into t's remaining needs. Copies of
//! size s save s-1 direct gates; total savings must come to 77 - 57 = 20.

use ftprep::circuit::Circuit;
use ftprep::code::CssCode;
use ftprep::ft;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn columns(code: &CssCode) -> BTreeMap<u8, u16> {
    // v_t = set of controls (pivots, qubits 0..10) whose row contains t.
    let (rows, pivots) = code.rref();
    let mut cols = BTreeMap::new();
    for t in 0..code.n as u8 {
        if pivots.contains(&(t as usize)) {
            continue;
        }
        let mut v = 0u16;
        for (i, &r) in rows.iter().enumerate() {
            if r >> t & 1 == 1 {
                v |= 1 << pivots[i];
            }
        }
        cols.insert(t, v);
    }
    cols
}

fn synthesize(rng: &mut ChaCha8Rng, cols: &BTreeMap<u8, u16>) -> Option<Circuit> {
    let targets: Vec<u8> = cols.keys().copied().collect();
    let mut need: BTreeMap<u8, u16> = cols.clone();
    let mut content: BTreeMap<u8, u16> = targets.iter().map(|&t| (t, 0)).collect();
    let mut savings = 0u32;
    let mut rounds: Vec<Vec<(u8, u8)>> = Vec::new();
    for r in 0..7u32 {
        let rounds_left = 7 - r;
        let mut busy = 0u32;
        let mut round = Vec::new();
        // copies first: greedy max-size matching among free qubits
        let mut copy_cands: Vec<(u8, u8, u16)> = Vec::new();
        for &h in &targets {
            let ch = content[&h];
            let s = ch.count_ones();
            if s < 2 || savings + (s - 1) > 20 {
                continue;
            }
            for &t in &targets {
                if t != h && ch & !need[&t] == 0 {
                    copy_cands.push((h, t, ch));
                }
            }
        }
        copy_cands.shuffle(rng);
        copy_cands.sort_by_key(|&(_, _, ch)| std::cmp::Reverse(ch.count_ones()));
        for &(h, t, ch) in &copy_cands {
            let s = ch.count_ones();
            if busy >> h & 1 == 1 || busy >> t & 1 == 1 || savings + (s - 1) > 20 {
                continue;
            }
            if rng.gen_bool(0.2) {
                continue;
            }
            savings += s - 1;
            *need.get_mut(&t).unwrap() &= !ch;
            *content.get_mut(&t).unwrap() |= ch;
            busy |= (1 << h) | (1 << t);
            round.push((h, t));
        }
        // direct loads, least slack first
        let mut ord = targets.clone();
        ord.shuffle(rng);
        ord.sort_by_key(|&t| {
            let n = need[&t].count_ones();
            std::cmp::Reverse(n as i32 - rounds_left as i32)
        });
        for &t in &ord {
            if busy >> t & 1 == 1 || need[&t] == 0 {
                continue;
            }
            let nt = need[&t];
            // a hub holding a servable set may pause to keep it intact
            let ct = content[&t];
            let servable = savings < 20
                && ct.count_ones() >= 2
                && targets.iter().any(|&t2| t2 != t && ct & !need[&t2] == 0);
            let slack = rounds_left as i32 - 1 - nt.count_ones() as i32;
            if servable && slack >= 1 && rng.gen_bool(0.5) {
                continue;
            }
            let direct_cands: Vec<u8> =
                (0..11u8).filter(|&c| nt >> c & 1 == 1 && busy >> c & 1 == 0).collect();
            if direct_cands.is_empty() {
                continue;
            }
            // bias early loads toward entries shared with other columns so
            // the accumulated prefix stays servable
            let c = if ct.count_ones() < 3 && rng.gen_bool(0.6) {
                *direct_cands
                    .iter()
                    .max_by_key(|&&c| {
                        let grown = ct | 1 << c;
                        targets.iter().filter(|&&t2| t2 != t && grown & !cols[&t2] == 0).count()
                    })
                    .unwrap()
            } else {
                *direct_cands.choose(rng).unwrap()
            };
            *need.get_mut(&t).unwrap() &= !(1 << c);
            *content.get_mut(&t).unwrap() |= 1 << c;
            busy |= (1 << c) | (1 << t);
            round.push((c, t));
        }
        rounds.push(round);
    }
    if savings != 20 || need.values().any(|&n| n != 0) {
        if std::env::var("DIAG").is_ok() {
            let left: u32 = need.values().map(|n| n.count_ones()).sum();
            eprintln!("end: savings {savings} entries_left {left}");
        }
        return None;
    }
    Circuit::new(23, (1u32 << 11) - 1, rounds).ok()
}

fn main() {
    let code = CssCode::golay();
    let cols = columns(&code);

    let order1_want: BTreeMap<u8, usize> = [(2u8, 16usize), (3, 14), (4, 4)].into();
    let order2_want: BTreeMap<u8, usize> = [(3u8, 493usize), (4, 400), (5, 35), (6, 2)].into();

    let seed0: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let budget: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(2_000_000);
    let mut built = 0u64;
    let mut census_hits = 0u64;
    let mut o1_hits = 0u64;
    let mut best_o2: Option<BTreeMap<u8, usize>> = None;
    for iter in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed0.wrapping_mul(0x9e3779b9).wrapping_add(iter));
        if iter % 500_000 == 0 {
            eprintln!("iter {iter}: built {built}, census {census_hits}, o1 {o1_hits}");
        }
        let Some(c) = synthesize(&mut rng, &cols) else { continue };
        built += 1;
        debug_assert!(c.prepares_zero(&code));
        let census = c.census();
        if census.rest != 38 {
            continue;
        }
        census_hits += 1;
        let fp1 = ft::correlated_fingerprint(&code, &c, 1);
        if fp1[0] != order1_want {
            continue;
        }
        o1_hits += 1;
        let fp2 = ft::correlated_fingerprint(&code, &c, 2);
        if fp2[1] == order2_want {
            println!("MATCH at iter {iter}");
            println!("{}", c.to_text());
            std::fs::write("/tmp/overlap_candidate.txt", c.to_text()).unwrap();
            return;
        }
        if best_o2.as_ref() != Some(&fp2[1]) && o1_hits % 25 == 1 {
            eprintln!("o1 hit, o2={:?}", fp2[1]);
            best_o2 = Some(fp2[1].clone());
        }
    }
    eprintln!("no match; built {built}, census {census_hits}, o1 {o1_hits}");
}
