import numpy as np
from django.test import SimpleTestCase

from .choice import choice_prob
from .exceptions import InvalidParameter
from .generator import GenConfig, generate


class GeneratorTests(SimpleTestCase):
    def test_same_seed_same_instance(self):
        config = GenConfig(T=400, P0=0.1, gamma=0.6, alpha=0.5, seed=42, n=10)
        first, second = generate(config), generate(config)
        np.testing.assert_array_equal(first.r, second.r)
        np.testing.assert_array_equal(first.v, second.v)
        np.testing.assert_array_equal(first.c, second.c)

    def test_full_assortment_no_purchase_share(self):
        for P0 in (0.1, 0.3):
            with self.subTest(P0=P0):
                dyn = generate(GenConfig(T=400, P0=P0, gamma=0.8, alpha=0.5, seed=3, n=10))
                self.assertAlmostEqual(choice_prob(dyn.base, range(dyn.n), -1), P0)

    def test_values_in_range(self):
        dyn = generate(GenConfig(T=400, P0=0.3, gamma=0.6, alpha=0.25, seed=7))
        self.assertEqual(dyn.n, 40)
        self.assertTrue(np.all((dyn.r > 0) & (dyn.r <= 10)))
        self.assertTrue(np.all(dyn.c >= 1))
        self.assertEqual(dyn.c.dtype, np.int64)

    def test_tighter_gamma_means_less_inventory(self):
        loose = generate(GenConfig(T=400, P0=0.3, gamma=0.8, alpha=0.5, seed=1, n=10))
        tight = generate(GenConfig(T=400, P0=0.3, gamma=0.6, alpha=0.5, seed=1, n=10))
        self.assertTrue(np.all(tight.c <= loose.c))

    def test_rejects_bad_parameters(self):
        with self.assertRaises(InvalidParameter):
            GenConfig(T=0, P0=0.3, gamma=0.8, alpha=0.5, seed=1)
        with self.assertRaises(InvalidParameter):
            GenConfig(T=10, P0=1.0, gamma=0.8, alpha=0.5, seed=1)
