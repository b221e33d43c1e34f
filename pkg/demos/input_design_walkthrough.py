"""Why designed excitation beats random inputs, on one shared realization.

Both collections replay the same initial states and the same process
noise; only the inputs differ.  The designed mode picks each input to
maximize the predicted drop in tr(S^-1) of the information matrix, which
shows up as a smaller trace of (Phi Phi')^-1 and, downstream, a smaller
model set under either right inverse.

Runs in a few seconds.
"""

from datareach import bundled_config, proxy_chain

cfg = bundled_config("lti_5d")
out = proxy_chain(cfg)

for mode in ("random", "designed"):
    r = out[mode]
    print(f"{mode:9s} tr((PhiPhi')^-1) = {r['trace_inverse']:.4f}   "
          f"proxy(pinv) = {r['proxy_pinv']:.3f}   "
          f"proxy(row-norm) = {r['proxy_row_norm']:.3f}")

print()
better = out["designed"]["trace_inverse"] < out["random"]["trace_inverse"]
print(f"designed excitation {'reduced' if better else 'did not reduce'} the trace "
      f"on this seed (seed {cfg.rng_seed})")
print(f"row-norm inverse shrinks the designed model set by "
      f"{-out['gap_row_norm_vs_pinv']:.3f} in proxy terms")
print(f"designed data shrinks the pseudoinverse model set by "
      f"{-out['gap_designed_vs_random']:.3f}")
