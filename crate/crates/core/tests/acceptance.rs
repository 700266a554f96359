//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runtime limits are part of each check.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use egalitarian::allocator::{
    brute_force_items, knapsack_items, schedule_items, IpItem, IpObjective, Item,
};
use egalitarian::egalitarianism::score_rois;
use egalitarian::{
    brute_force_allocate, egalitarianism, ip_schedule_with, income_rate, knapsack_allocate,
    machine_roi, optimal_roi, pure_stake_roi, sybil_check, ticket_stake_roi, CapitalGrid,
    CoinParams, EconParams, Machine, MachineCatalog, Model, PowScenario, StakeParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

struct Report {
    failed: usize,
}

impl Report {
    fn run(&mut self, id: u32, name: &str, limit: Duration, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > limit => Err(format!("{detail}; took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail} ({took:.2?})"),
            Err(detail) => {
                self.failed += 1;
                println!("FAIL [{id}] {name}: {detail} ({took:.2?})");
            }
        }
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn real(s: &str) -> f64 {
    match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().unwrap() / b.trim().parse::<f64>().unwrap(),
        None => s.trim().parse().unwrap(),
    }
}

/// Fields of every data row, read straight from the bundled text.
fn raw_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|f| f.trim().to_string()).collect())
        .collect()
}

fn income_formula() -> Check {
    let (machines_text, coins_text) = MachineCatalog::bundled_sources();
    let cat = MachineCatalog::bundled();
    let e = EconParams::default();
    let coins: Vec<Vec<String>> = raw_rows(coins_text);
    let mut n = 0;
    for row in raw_rows(machines_text) {
        ensure(row.len() == 5, || format!("unexpected row {row:?}"))?;
        let coin = coins.iter().find(|c| c[0] == row[1]).ok_or("coin missing")?;
        let (hr, w) = (real(&row[2]), real(&row[3]));
        let (br, thr, bgr, tp) = (real(&coin[1]), real(&coin[2]), real(&coin[3]), real(&coin[4]));
        let expected = 3600.0 * (hr / thr) * br * bgr * tp - w / 1000.0 * 0.08;

        let m = cat
            .machines()
            .iter()
            .find(|m| m.name == row[0] && m.coin == row[1])
            .ok_or_else(|| format!("{} not in catalog", row[0]))?;
        let got = income_rate(m, cat.coin(&m.coin).map_err(err)?, &e).usd_per_hour;
        let rel = (got - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
        ensure(rel <= 1e-9, || format!("{}: {got} vs {expected}", m.name))?;
        if m.coin == "btc" {
            ensure(got > 0.0, || format!("{} is unprofitable", m.name))?;
        }
        n += 1;
    }
    ensure(n == cat.machines().len(), || "row count mismatch".into())?;
    Ok(format!("{n} machines agree to 1e-9, all BTC rates positive"))
}

fn random_machines(rng: &mut ChaCha8Rng, c: &CoinParams) -> Vec<Machine> {
    let k = rng.gen_range(1..=4);
    (0..k)
        .map(|i| {
            let price = f64::from(rng.gen_range(150u32..=3000));
            Machine::new(
                format!("m{i}"),
                &c.coin,
                rng.gen_range(1e12..4e13),
                rng.gen_range(100.0..2500.0),
                price,
            )
            .unwrap()
        })
        .collect()
}

fn oracle_equivalence() -> Check {
    let cat = MachineCatalog::bundled();
    let c = cat.coin("btc").map_err(err)?.clone();
    let e = EconParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let instances = 250;
    for i in 0..instances {
        let ms = random_machines(&mut rng, &c);
        let capital = f64::from(rng.gen_range(0u32..=5000));
        let dp = knapsack_allocate(capital, &ms, &c, &e, 1.0).map_err(err)?;
        let oracle = brute_force_allocate(capital, &ms, &c, &e).map_err(err)?;
        ensure(dp.proceeds == oracle.proceeds, || {
            format!("instance {i}: dp {} vs oracle {}", dp.proceeds, oracle.proceeds)
        })?;
    }
    Ok(format!("{instances} random instances match exactly"))
}

fn sybil() -> Check {
    let multiples = [2, 3, 4];
    let mut checked = 0;

    // exact solvers on integer data: every quantity is an exactly representable integer
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let grid = CapitalGrid::new(5.0, 150.0, 5.0).map_err(err)?;
    for _ in 0..20 {
        let items: Vec<Item> = (0..rng.gen_range(1..=3))
            .map(|_| Item {
                price: f64::from(rng.gen_range(7u32..60)),
                value: f64::from(rng.gen_range(-20i32..200)),
            })
            .collect();
        let brute = |v: f64| brute_force_items(v, &items).map(|s| s.value / v);
        let dp = |v: f64| knapsack_items(v, &items, 1.0).map(|s| s.value / v);
        for report in [
            sybil_check(&brute, &grid, &multiples, 0.0),
            sybil_check(&dp, &grid, &multiples, 0.0),
        ] {
            let report = report.map_err(err)?;
            ensure(report.holds(), || format!("exact solver: {:?}", report.violations[0]))?;
            checked += report.checked;
        }
    }

    let grid = CapitalGrid::default();
    let p = StakeParams::default();
    let pure = |v: f64| pure_stake_roi(v, &p);
    let ticket = |v: f64| ticket_stake_roi(v, &p);
    for report in [
        sybil_check(&pure, &grid, &multiples, 0.0),
        sybil_check(&ticket, &grid, &multiples, 0.0),
    ] {
        let report = report.map_err(err)?;
        ensure(report.holds(), || format!("stake model: {:?}", report.violations[0]))?;
        checked += report.checked;
    }

    let cat = MachineCatalog::bundled();
    for coin in cat.coins().keys() {
        let s = PowScenario::from_catalog(&cat, coin, EconParams::default(), 1.0).map_err(err)?;
        let eval = s.evaluator(4.0 * grid.max_capital).map_err(err)?;
        let report = sybil_check(&eval, &grid, &multiples, 1e-9).map_err(err)?;
        ensure(report.holds(), || format!("{coin} DP: {:?}", report.violations[0]))?;
        checked += report.checked;
    }
    Ok(format!("{checked} (capital, multiple) pairs, no violations"))
}

fn pow_scores() -> Result<Vec<(String, f64)>, String> {
    let cat = MachineCatalog::bundled();
    let grid = CapitalGrid::default();
    cat.coins()
        .keys()
        .map(|coin| {
            let s = PowScenario::from_catalog(&cat, coin, EconParams::default(), 1.0).map_err(err)?;
            let score = egalitarianism(&s.curve(&grid).map_err(err)?).map_err(err)?;
            Ok((coin.clone(), score.value))
        })
        .collect()
}

fn table_ordering(scores: &[(String, f64)]) -> Check {
    let e = |coin: &str| scores.iter().find(|(c, _)| c == coin).map(|(_, v)| *v).unwrap();
    for (coin, v) in scores {
        ensure(*v < 0.0, || format!("e({coin}) = {v} is not negative"))?;
    }
    let (dcr, btc, eth, xmr, ltc) = (e("dcr"), e("btc"), e("eth"), e("xmr"), e("ltc"));
    ensure(dcr < btc && btc < eth && eth < xmr, || {
        format!("ordering dcr {dcr} < btc {btc} < eth {eth} < xmr {xmr} fails")
    })?;
    ensure(btc < ltc && ltc < 0.0, || format!("ordering btc {btc} < ltc {ltc} < 0 fails"))?;
    ensure((-0.15..=-0.005).contains(&btc), || format!("e(btc) = {btc} outside band"))?;
    Ok(format!(
        "dcr {dcr:.6} < btc {btc:.6} < eth {eth:.6} < xmr {xmr:.6}, ltc {ltc:.6}"
    ))
}

fn perfect_pos() -> Check {
    let grid = CapitalGrid::default();
    let free = Model::PureStake(StakeParams::new(0.05, 0.0, 1756.0).map_err(err)?);
    let v0 = egalitarianism(&free.curve(&grid).map_err(err)?).map_err(err)?.value;
    ensure(v0 == 0.0, || format!("fee 0 gives {v0}"))?;
    let p = StakeParams::new(0.05, 0.01, 1756.0).map_err(err)?;
    let v1 = egalitarianism(&Model::PureStake(p).curve(&grid).map_err(err)?).map_err(err)?.value;
    let bound = 1e-6 * p.annual_return_rate.powi(2);
    ensure(v1.abs() < bound, || format!("fee 0.01 gives {v1}, bound {bound}"))?;
    Ok(format!("fee 0 exactly 0, fee 0.01 gives {v1:e}"))
}

fn ticket_envelope(btc: f64) -> Check {
    let p = StakeParams::default();
    let rois = (1..=50)
        .map(|k| ticket_stake_roi(f64::from(k) * p.ticket_price, &p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let envelope = score_rois(rois).map_err(err)?.value;
    ensure(envelope == 0.0, || format!("envelope variance {envelope}"))?;
    let full = egalitarianism(&Model::TicketStake(p).curve(&CapitalGrid::default()).map_err(err)?)
        .map_err(err)?
        .value;
    ensure(full < 0.0 && full > btc, || format!("e(ticket) = {full}, e(btc) = {btc}"))?;
    Ok(format!("envelope exactly 0, e(ticket) {full:.6} in ({btc:.6}, 0)"))
}

fn ip_dominance() -> Check {
    let cat = MachineCatalog::bundled();
    let e = EconParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let coins: Vec<&String> = cat.coins().keys().collect();
    let mut instances = 0;
    while instances < 24 {
        let coin = coins[rng.gen_range(0..coins.len())];
        let c = cat.coin(coin).map_err(err)?;
        let all = cat.filter_by_coin(coin).map_err(err)?;
        let k = rng.gen_range(1..=all.len().min(3));
        let mut ms: Vec<Machine> = Vec::new();
        while ms.len() < k {
            let m = &all[rng.gen_range(0..all.len())];
            if !ms.iter().any(|x| x.name == m.name) {
                ms.push(m.clone());
            }
        }
        let cheapest = ms.iter().map(|m| m.price).fold(f64::INFINITY, f64::min);
        let capital = (cheapest * rng.gen_range(0.0..4.0)).floor();
        let steps = rng.gen_range(1..=6);
        let knap = knapsack_allocate(capital, &ms, c, &e, 1.0).map_err(err)?;
        for obj in [IpObjective::AsWritten, IpObjective::CapitalFirst] {
            let s = ip_schedule_with(capital, &ms, c, &e, steps, obj).map_err(err)?;
            ensure(s.is_feasible(1e-9), || format!("{coin} {capital}: infeasible schedule"))?;
            ensure(s.objective >= knap.proceeds, || {
                format!("{coin} {capital} {steps} {obj:?}: ip {} < knapsack {}", s.objective, knap.proceeds)
            })?;
        }
        instances += 1;
    }

    // a machine that repays its price within the period: income funds a second
    // one. The cheap weak type lifts the per-type holdings bound to 2.
    let items = [
        IpItem {
            price: 100.0,
            gross_per_step: 30.0,
            electricity_per_step: 0.0,
        },
        IpItem {
            price: 50.0,
            gross_per_step: 1.0,
            electricity_per_step: 0.0,
        },
    ];
    let steps = 8;
    let upfront: Vec<Item> = items
        .iter()
        .map(|it| Item {
            price: it.price,
            value: (it.gross_per_step - it.electricity_per_step) * steps as f64,
        })
        .collect();
    let knap = knapsack_items(100.0, &upfront, 1.0).map_err(err)?;
    let names = ["rig".to_string(), "toy".to_string()];
    let s = schedule_items(100.0, &names, &items, steps, 1.0, IpObjective::AsWritten)
        .map_err(err)?;
    ensure(s.objective > knap.value, || {
        format!("constructed instance: ip {} not above knapsack {}", s.objective, knap.value)
    })?;
    Ok(format!(
        "{instances} instances dominate; constructed instance {} > {}",
        s.objective, knap.value
    ))
}

fn cap_convergence() -> Check {
    let cat = MachineCatalog::bundled();
    let c = cat.coin("btc").map_err(err)?;
    let ms = cat.filter_by_coin("btc").map_err(err)?;
    let e = EconParams::default();
    let best = ms
        .iter()
        .max_by(|a, b| machine_roi(a, c, &e).total_cmp(&machine_roi(b, c, &e)))
        .ok_or("no machines")?;
    let cap = machine_roi(best, c, &e);
    let roi = optimal_roi(100.0 * best.price, &ms, c, &e, 1.0).map_err(err)?;
    let gap = (cap - roi).abs() / cap;
    ensure(gap <= 0.01, || format!("roi {roi} vs cap {cap}"))?;
    Ok(format!("{} at 100x price: {roi:.6} vs cap {cap:.6} ({:.4}%)", best.name, gap * 100.0))
}

fn metric_algebra(btc_rois: &[f64]) -> Check {
    let constant = score_rois(vec![0.37; 991]).map_err(err)?.value;
    ensure(constant == 0.0, || format!("constant curve gives {constant}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let random: Vec<f64> = (0..500).map(|_| rng.gen_range(-1.0..2.0)).collect();
    for rois in [btc_rois, &random[..]] {
        let base = score_rois(rois.iter().copied()).map_err(err)?.value;
        for shift in [-3.0, 0.5, 10.0] {
            let v = score_rois(rois.iter().map(|r| r + shift)).map_err(err)?.value;
            ensure((v - base).abs() <= 1e-12, || format!("shift {shift}: {v} vs {base}"))?;
        }
        for s in [-2.0, 0.1, 3.0, 7.5] {
            let v = score_rois(rois.iter().map(|r| r * s)).map_err(err)?.value;
            let expected = s * s * base;
            ensure((v - expected).abs() <= 1e-9 * expected.abs(), || {
                format!("scale {s}: {v} vs {expected}")
            })?;
        }
    }
    Ok("constant 0, shift invariant to 1e-12, scale by s^2 to 1e-9".into())
}

fn main() -> ExitCode {
    let mut report = Report { failed: 0 };
    let secs = Duration::from_secs;

    report.run(1, "income-rate formula", secs(1), income_formula);
    report.run(2, "oracle equivalence", secs(60), oracle_equivalence);
    report.run(3, "Sybil property", secs(120), sybil);

    let mut scores = Vec::new();
    report.run(4, "PoW ordering and BTC band", secs(600), || {
        scores = pow_scores()?;
        table_ordering(&scores)
    });
    let btc = scores.iter().find(|(c, _)| c == "btc").map(|(_, v)| *v);

    report.run(5, "perfect PoS egalitarianism", secs(1), perfect_pos);
    report.run(6, "ticket envelope", secs(60), || {
        ticket_envelope(btc.ok_or("no BTC score from criterion 4")?)
    });
    report.run(7, "IP dominance", secs(300), ip_dominance);
    report.run(8, "ROI cap convergence", secs(60), cap_convergence);
    report.run(9, "metric algebra", secs(60), || {
        let cat = MachineCatalog::bundled();
        let s = PowScenario::from_catalog(&cat, "btc", EconParams::default(), 1.0).map_err(err)?;
        let curve = s.curve(&CapitalGrid::default()).map_err(err)?;
        metric_algebra(&curve.rois().collect::<Vec<_>>())
    });

    if report.failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{} criteria failed", report.failed);
        ExitCode::FAILURE
    }
}
