# coding: utf-8

# # Two tasks, one learner
#
# Train a representation learner on breast-cancer diagnosis, test it, then
# train the same instance on diabetes and test the first task again.

# In[1]:

from pathlib import Path

from forgetbench import RepresentationLearner, SplitSpec, load_pima, load_wbc, run_forgetting, split

DATA = Path(__file__).resolve().parents[1] / "data"

wbc = split(load_wbc(DATA / "wdbc.data"), SplitSpec(seed=7))
pima = split(load_pima(DATA / "pima-indians-diabetes.csv"), SplitSpec(seed=7))
print(len(wbc.train), len(wbc.test), wbc.feature_dim)
print(len(pima.train), len(pima.test), pima.feature_dim)


# The two tasks do not even share an input size (30 vs 8 features). The
# learner keeps a separate set of representations per task tag, so training
# on the second task cannot touch anything built for the first.

# In[2]:

rep = run_forgetting(RepresentationLearner, wbc, pima, epochs=10)
print(f"wbc before : {rep.acc_a_before:.4f}")
print(f"pima       : {rep.acc_b:.4f}")
print(f"wbc after  : {rep.acc_a_after:.4f}")
print("identical predictions:", rep.predictions_identical, " delta:", rep.forgetting_delta)


# And the other direction.

# In[3]:

back = run_forgetting(RepresentationLearner, pima, wbc, epochs=10)
print(f"pima before {back.acc_a_before:.4f}  after {back.acc_a_after:.4f}  identical={back.predictions_identical}")
