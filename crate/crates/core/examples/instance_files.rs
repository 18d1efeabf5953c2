//! Write an instance and a solved plan to JSON and read them back.

use constrained_ot::io::{
    read_instance_file, read_plan_file, write_instance_file, write_plan_file, PlanFormat,
};
use constrained_ot::prelude::*;
use constrained_ot::scenarios::{generate_ev_instance, EvScenarioConfig};

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("constrained-ot-example");
    std::fs::create_dir_all(&dir)?;
    let inst = generate_ev_instance(&EvScenarioConfig {
        m: 6,
        n: 4,
        seed: 2,
        ..Default::default()
    })?;
    let inst_path = dir.join("ev.json");
    write_instance_file(&inst, &inst_path)?;
    assert_eq!(read_instance_file(&inst_path)?, inst);

    let report = solve(&inst, &SolverConfig::default())?;
    let plan_path = dir.join("plan.json");
    write_plan_file(&report, PlanFormat::Sparse, &plan_path)?;
    let back = read_plan_file(&plan_path)?;
    assert_eq!(back.to_transport_plan(&inst)?, report.plan);
    println!("{}", std::fs::read_to_string(&plan_path)?);
    println!("files in {}", dir.display());
    println!(
        "try: cot check --instance {} --plan {}",
        inst_path.display(),
        plan_path.display()
    );
    Ok(())
}
