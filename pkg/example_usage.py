from analysis import SearchConfig, epidemic_params, campaign_summary, sweep
from analysis.simulator import SimParams, run_campaign
from core.series import read_series, generation_counts
from core.forest import build_forest

# Example usage flow:

# Step 1: Per-generation parameters of a published campaign
print("Step 1: Epidemic parameters of campaign V1...")
series = read_series("fixtures/v1_table1.csv")
params = epidemic_params(series)
summary = campaign_summary(series, params)
print(f"Reach: {summary.reach:g}, generations: {summary.generations}")
print(f"Super-critical generations: {sorted(summary.super_set)}")

# Step 2: How early can the reach be predicted?
print("\nStep 2: Fitting a branching model on growing prefixes...")
report = sweep(series, SearchConfig(refine_rounds=3), ks=(3, 5, 9, 12))
for row in report.rows:
    print(f"k={row.k}: estimated reach {row.estimated_reach:.2f} ({100 * row.reach_error_pct:.2f}% error)")

# Step 3: A synthetic campaign with known parameters
print("\nStep 3: Simulating a campaign...")
campaign = run_campaign(SimParams(p=0.3, lam=4.0, N=1000, seeds=1, rng_seed=42))
simulated = generation_counts(build_forest(campaign.log))
print(f"Simulated {len(campaign.log)} events, reach {simulated.reach}")
