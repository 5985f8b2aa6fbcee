# coding: utf-8

# # Small worked witnesses
#
# A 1-D linear map y = w x trained by gradient descent, checked against the
# least-squares optimum w = sum(xy) / sum(x^2).

# In[1]:

from forgetbench import LinearRegressor, least_squares_weight

reg = LinearRegressor(1)
reg.fit([1.0], [1.0])
print("after L  :", reg.predict([1.0])[0], "oracle", least_squares_weight([1.0], [1.0]))
reg.fit([1.0], [-1.0])   # conflicting target for the same input
print("after L' :", reg.predict([1.0])[0], "oracle", least_squares_weight([1.0], [-1.0]))


# Same law (y = 2x) in both phases: nothing to forget.

# In[2]:

reg = LinearRegressor(1)
reg.fit([1.0], [2.0])
reg.fit([2.0], [4.0])
print("predict(1):", reg.predict([1.0])[0])


# # Fitting too well
#
# Five noisy points from y = x. A degree-9 polynomial passes through all of
# them and does badly on five fresh points from the same line.

# In[3]:

from forgetbench.protocols import overfit_probe

for degree in (1, 3, 9):
    p = overfit_probe(degree, seed=0)
    print(f"degree {degree}: train {p['train_mse']:.2e}  held-out {p['test_mse']:.4f}")


# In[4]:

from forgetbench import run_witnesses

for w in run_witnesses():
    print(w.name, w.passed)
