use std::collections::{BTreeMap, BTreeSet};

use ffcubes::fit_exponent;
use ffcubes::parallel::chunks;
use ffcubes::params::{parse_config, Params};
use proptest::prelude::*;

proptest! {
    #[test]
    fn chunks_partition_the_range(total in 0u64..1_000_000) {
        let c = chunks(total);
        prop_assert!(c.len() <= 256);
        prop_assert_eq!(c.first().map_or(0, |r| r.start), 0);
        prop_assert_eq!(c.last().map_or(0, |r| r.end), total);
        prop_assert!(c.windows(2).all(|w| w[0].end == w[1].start));
        prop_assert!(c.iter().all(|r| r.start < r.end));
    }

    #[test]
    fn fit_recovers_power_growth(q in prop::sample::select(vec![2u32, 4, 5, 7]), s in 1u32..4, c in 1u64..50, len in 2i64..6) {
        let series: Vec<(i64, u64)> = (1..=len).map(|b| (b, c * (q as u64).pow(s * b as u32))).collect();
        let f = fit_exponent(q, &series).unwrap();
        prop_assert!((f.lsq - s as f64).abs() < 1e-9);
        prop_assert!(f.successive.iter().all(|&(_, x)| (x - s as f64).abs() < 1e-9));
        prop_assert_eq!(f.points, len as usize);
    }

    #[test]
    fn config_round_trip(entries in prop::collection::btree_map("[a-z][a-z-]{0,8}", "[A-Za-z0-9,^+]{1,10}", 0..8)) {
        let text: String = entries.iter().map(|(k, v)| format!("{k} = {v}  # note\n")).collect();
        prop_assert_eq!(parse_config(&text).unwrap(), entries);
    }

    #[test]
    fn command_line_wins(file_v in 0u32..100, cli_v in 0u32..100, on_cli in any::<bool>()) {
        let known: BTreeSet<String> = ["b-max".to_string()].into();
        let file = BTreeMap::from([("b-max".to_string(), file_v.to_string())]);
        let cli = if on_cli { BTreeMap::from([("b-max".to_string(), cli_v.to_string())]) } else { BTreeMap::new() };
        let p = Params::new(file, cli, &known).unwrap();
        prop_assert_eq!(p.get("b-max", 0u32).unwrap(), if on_cli { cli_v } else { file_v });
        prop_assert_eq!(p.resolved().get("b-max").cloned(), Some(p.get("b-max", 0u32).unwrap().to_string()));
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let known: BTreeSet<String> = ["form".to_string()].into();
    let file = BTreeMap::from([("frm".to_string(), "1,1".to_string())]);
    assert!(Params::new(file, BTreeMap::new(), &known).is_err());
    assert!(parse_config("b-max = 1\nb-max = 2\n").is_err());
    assert!(parse_config("no equals sign\n").is_err());
}
