# coding: utf-8

# # Inside the representation store
#
# Each distinct input is kept as a literal representation. Inputs of the same
# label that fall within tau of an existing centroid are folded into it.

# In[1]:

from forgetbench import RepresentationStore

store = RepresentationStore(merge_threshold=0.5)
store.ingest([0.2, 0.4], 1, "demo")
store.ingest([0.3, 0.5], 1, "demo")
print(store.ingest([0.3, 0.5], 1, "demo"))   # duplicate: no change
for r in store.representations:
    print(r.kind, r.label, r.vector, r.support)


# In[2]:

print(store.predict([0.25, 0.45]))
print(store.nearest([0.9, 0.9]))


# A second task never reads or writes the first task's representations.

# In[3]:

before = store.fingerprint()
print(store.predict([0.2, 0.4], "demo"))
store.ingest([0.2, 0.4], 0, "other")
print(store.predict([0.2, 0.4], "demo"), store.predict([0.2, 0.4]))
print(before.hex(), store.fingerprint().hex())


# Stores serialize to JSON and come back with the same digest.

# In[4]:

import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "store.json"
    store.save(path)
    print(RepresentationStore.load(path).fingerprint() == store.fingerprint())
print(RepresentationStore().fingerprint().hex())   # empty store
