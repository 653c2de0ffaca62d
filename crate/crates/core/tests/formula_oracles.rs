mod common;

use common::{pt, rel_err};
use d2d_hcn::channel::{
    antenna_gain_db, blockage_probability, cellular_rx_power, mmwave_rx_power, noise_power,
    AntennaPattern, DensityUnit,
};
use d2d_hcn::game::switch_gain;
use d2d_hcn::rate::{Coalition, Partition, RateModel};
use d2d_hcn::scenario::{Point, Scenario};
use d2d_hcn::units::watts_to_dbm;
use d2d_hcn::SystemParams;

const TOL: f64 = 1e-9;

fn scenario(cells: &[Point], tx: &[Point], rx: &[Point]) -> Scenario {
    Scenario {
        bs_position: pt(250.0, 250.0),
        cellular_positions: cells.to_vec(),
        d2d_tx_positions: tx.to_vec(),
        d2d_rx_positions: rx.to_vec(),
        channel_gains: None,
    }
}

fn fixture_one_cell_two_pairs() -> (Scenario, SystemParams) {
    let s = scenario(
        &[pt(300.0, 250.0)],
        &[pt(100.0, 100.0), pt(400.0, 380.0)],
        &[pt(105.0, 100.0), pt(400.0, 388.0)],
    );
    (s, SystemParams::with_counts(1, 2))
}

fn fixture_two_mmwave_pairs() -> (Scenario, SystemParams) {
    let s = scenario(
        &[],
        &[pt(200.0, 200.0), pt(200.0, 215.0)],
        &[pt(210.0, 200.0), pt(210.0, 215.0)],
    );
    (s, SystemParams::with_counts(0, 2))
}

fn fixture_two_cells_three_pairs() -> (Scenario, SystemParams) {
    let s = scenario(
        &[pt(120.0, 300.0), pt(380.0, 90.0)],
        &[pt(60.0, 60.0), pt(260.0, 240.0), pt(450.0, 420.0)],
        &[pt(66.0, 52.0), pt(251.0, 247.0), pt(441.0, 428.0)],
    );
    (s, SystemParams::with_counts(2, 3))
}

#[test]
fn antenna_reference_values() {
    let p = AntennaPattern::new(30.0).unwrap();
    assert!((antenna_gain_db(0.0, &p).unwrap() - 15.909_977_437_209_967).abs() < 1e-9);
    assert!((antenna_gain_db(15.0, &p).unwrap() - (p.max_gain_db - 3.01)).abs() < 1e-12);
    assert!((antenna_gain_db(90.0, &p).unwrap() + 11.977_2).abs() < 1e-4);
    assert_eq!(p.main_lobe_width_deg, 78.0);
}

#[test]
fn cellular_power_reference_values() {
    assert_eq!(cellular_rx_power(1.0, 0.0, 0.0, 1.0, 1.0, 2.0).unwrap(), 1.0);
    let near = cellular_rx_power(1.0, 0.0, 0.0, 3.0, 1.0, 2.0).unwrap();
    let far = cellular_rx_power(1.0, 0.0, 0.0, 6.0, 1.0, 2.0).unwrap();
    assert!(rel_err(near / far, 4.0) < TOL);
    let w = cellular_rx_power(common::dbm(23.0), 0.5, 14.0, 100.0, 1.0, 2.0).unwrap();
    assert!((watts_to_dbm(w) + 2.5).abs() < 1e-9);
}

#[test]
fn noise_and_blockage_reference_values() {
    let cell = noise_power(15e3, -174.0, DensityUnit::DbmPerHz).unwrap();
    assert!((watts_to_dbm(cell) + 132.239_087_409_443).abs() < 1e-9);
    let mm = noise_power(2160e6, -134.0, DensityUnit::DbmPerMhz).unwrap();
    assert!((watts_to_dbm(mm) + 100.655_462_488_491).abs() < 1e-9);
    let unit = noise_power(1.0, -174.0, DensityUnit::DbmPerHz).unwrap();
    assert!((watts_to_dbm(unit) + 174.0).abs() < 1e-12);
    assert!("dBW/Hz".parse::<DensityUnit>().is_err());

    assert_eq!(blockage_probability(0.0, 0.01), 0.0);
    assert!((blockage_probability(10.0, 0.01) - 0.095_162_581_964_040_4).abs() < 1e-15);
    assert_eq!(blockage_probability(250.0, 0.0), 0.0);
}

#[test]
fn side_by_side_mmwave_interference() {
    let (s, p) = fixture_two_mmwave_pairs();
    // both ends see the other link 56.3 degrees off boresight: side lobes
    let w = mmwave_rx_power(1, 0, &s, &p).unwrap();
    assert!((watts_to_dbm(w) + 97.078_095_290_713).abs() < 1e-9);
    assert!(rel_err(w, common::mm_power(&s, &p, 0, 1)) < TOL);

    let boresight = mmwave_rx_power(0, 0, &s, &p).unwrap();
    let max = AntennaPattern::new(30.0).unwrap().max_gain_db;
    let expected = common::dbm(20.0 + 20.0 * (0.005 / (4.0 * std::f64::consts::PI)).log10() + 2.0 * max - 20.0);
    assert!(rel_err(boresight, expected) < TOL);

    let mut silent = p.clone();
    silent.mui_factor = 0.0;
    assert_eq!(mmwave_rx_power(1, 0, &s, &silent).unwrap(), 0.0);
}

#[test]
fn cellular_coalition_fixture() {
    let (s, p) = fixture_one_cell_two_pairs();
    let m = RateModel::new(&s, &p).unwrap();
    let v = m.cellular_coalition_value(0, &[0, 1]).unwrap();
    assert!(rel_err(v.cellular_rate, 48_496.456_825_191_04) < TOL);
    assert!(rel_err(v.member_rates[0], 161_885.621_914_713_27) < TOL);
    assert!(rel_err(v.member_rates[1], 129_085.441_300_479_27) < TOL);
    assert!(rel_err(v.value, 339_467.520_040_383_56) < TOL);
    let o = common::evaluate(&s, &p, &[1, 1]);
    assert!(rel_err(v.value, o.total) < TOL);

    let empty = m.cellular_coalition_value(0, &[]).unwrap();
    assert_eq!(empty.value, empty.cellular_rate);
    assert!(empty.cellular_rate > v.cellular_rate);
}

#[test]
fn mmwave_coalition_fixture() {
    let (s, p) = fixture_two_mmwave_pairs();
    let m = RateModel::new(&s, &p).unwrap();
    let v = m.mmwave_coalition_value(&[0, 1]).unwrap();
    for r in &v.member_rates {
        assert!(rel_err(*r, 42_559_429_948.962_95) < TOL);
    }
    assert!(rel_err(v.value, 77_018_729_416.203_86) < TOL);
    assert!(rel_err(v.value, common::evaluate(&s, &p, &[1, 1]).total) < TOL);

    let mut clear = p.clone();
    clear.blockage_beta = 0.0;
    let m = RateModel::new(&s, &clear).unwrap();
    let v = m.mmwave_coalition_value(&[0, 1]).unwrap();
    assert_eq!(v.value, v.member_rates.iter().sum::<f64>());
}

#[test]
fn system_sum_rate_fixture() {
    let (s, p) = fixture_two_cells_three_pairs();
    let m = RateModel::new(&s, &p).unwrap();
    let part = Partition::from_ids(2, &[1, 3, 2]).unwrap();
    let r = m.system_sum_rate(&part).unwrap();
    assert!(rel_err(r.system_sum_rate, 40_546_004_572.921_64) < TOL);
    assert!(rel_err(r.per_cellular_rate[0], 33_589.364_188_634_14) < TOL);
    assert!(rel_err(r.per_cellular_rate[1], 20_853.217_294_714_716) < TOL);
    assert!(rel_err(r.per_d2d_rate[1], 45_442_437_458.834_19) < TOL);
    assert!(rel_err(r.system_sum_rate, common::evaluate(&s, &p, &[1, 3, 2]).total) < TOL);
    assert!(rel_err(m.sum_rate_direct(&part).unwrap(), r.system_sum_rate) < TOL);
}

#[test]
fn switch_gain_matches_full_difference() {
    let (s, p) = fixture_one_cell_two_pairs();
    let m = RateModel::new(&s, &p).unwrap();
    let before = Partition::from_ids(1, &[1, 1]).unwrap();
    let after = Partition::from_ids(1, &[1, 2]).unwrap();
    let gain = switch_gain(&m, &before, 1, Coalition::MmWave).unwrap();
    let full = m.system_sum_rate(&after).unwrap().system_sum_rate
        - m.system_sum_rate(&before).unwrap().system_sum_rate;
    assert!(rel_err(gain, full) < TOL);
    assert!(gain > 0.0);
}

#[test]
fn mmwave_dwarfs_cellular_at_defaults() {
    let (s, p) = fixture_one_cell_two_pairs();
    let m = RateModel::new(&s, &p).unwrap();
    let cell = m.system_sum_rate(&Partition::from_ids(1, &[1, 2]).unwrap()).unwrap();
    let mm = m.system_sum_rate(&Partition::from_ids(1, &[2, 1]).unwrap()).unwrap();
    assert!(mm.per_d2d_rate[0] > 1e4 * cell.per_d2d_rate[0]);
}
