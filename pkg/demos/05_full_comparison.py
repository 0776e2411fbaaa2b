"""All three scenarios, all four architectures, rendered as tables."""

from xborder.simkit import load_config, run_all, self_check
from xborder.simkit.report import render_text

cfg = load_config()
bundle = run_all(cfg, jobs=4)
print(render_text(bundle["results"], bundle["measured"]))

# %%
for name, ok, detail in self_check(bundle, cfg):
    print("PASS" if ok else "FAIL", name, detail)
