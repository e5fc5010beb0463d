"""Verification accuracy, open-set identification and the security trade-off.

Three questions about a trained model:

* verification: if a user claims a group, how often is a genuine member
  rejected when impostors are held to a 5% acceptance rate?
* identification: accepting first, naming the group second, how does the
  detection-and-identification rate degrade as groups grow?
* security/privacy: how well can a curious server that knows the
  projection reconstruct enrolled signatures (from group representations)
  or query signatures (from their codes)?
"""

import numpy as np

from gmkit import (
    ModelConfig,
    SyntheticSpec,
    generate,
    identification_report,
    identification_sweep,
    pfn_at_pfp,
    query_set_from_dataset,
    security_report,
    threshold_at_pfp,
    train,
    verification_sweep,
)

spec = SyntheticSpec(
    num_identities=128,
    samples_per_identity=4,
    dim=64,
    noise_sigma=0.08,
    impostor_fraction=0.5,
    seed=11,
)
dataset = generate(spec)

print(f"{'m':>4} {'M':>4} {'pfn@5%fp':>9} {'P_eps':>7} {'DIR':>7} {'MSE_sec':>8} {'MSE_priv':>9}")
for group_size in (2, 8, 32):
    config = ModelConfig(
        code_length=32,
        sparsity=8,
        num_groups=128 // group_size,
        max_outer_iters=15,
        seed=11,
    )
    model = train(dataset.enrolled, config)
    queries = query_set_from_dataset(dataset, model)

    roc = verification_sweep(model, queries, np.random.default_rng(11))
    pfn = pfn_at_pfp(roc, 0.05)

    ident_roc = identification_sweep(model, queries)
    tau = threshold_at_pfp(ident_roc, 0.05)
    ident = identification_report(model, queries, tau)

    sec = security_report(dataset.enrolled, queries, model)
    print(
        f"{group_size:>4} {config.num_groups:>4} {pfn:>9.3f} {ident.p_epsilon:>7.3f} "
        f"{ident.dir_rate:>7.3f} {sec.mse_security:>8.4f} {sec.mse_privacy:>9.4f}"
    )

print(
    "\npacking more members into a group representation (larger m) steadily"
    "\nhurts verification; detection-and-identification degrades too, though"
    "\nwith very few groups naming the right one gets easier by chance, which"
    "\nsoftens DIR at the largest m on a single run.  the upside of packing:"
    "\nthe aggregated representation reveals less about any single enrolled"
    "\nsignature, so MSE_sec stays above MSE_priv throughout."
)
