import hypothesis
import numpy as np

np.seterr(all="warn", under="ignore")

hypothesis.settings.register_profile("ci", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")
