import sys
from datetime import datetime
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from postimpact.corpus import LinkKind, Post, ReactionCounts
from postimpact.features import FeatureVector


def fv(dense) -> FeatureVector:
    """Dense list -> sparse FeatureVector (test convenience)."""
    d = np.asarray(dense, dtype=np.float64)
    nz = np.flatnonzero(d)
    return FeatureVector(dim=len(d), indices=nz.astype(np.int32), values=d[nz])


def make_post(id="p1", brand="B", text="hola mundo", like=1, love=0, haha=0,
              wow=0, sad=0, angry=0, comments=0, shares=0,
              link_kind=LinkKind.NONE,
              published_at=datetime(2019, 1, 7, 18, 30)) -> Post:
    return Post(id=id, brand=brand, text=text, published_at=published_at,
                link_kind=link_kind,
                reactions=ReactionCounts(like=like, love=love, haha=haha,
                                         wow=wow, sad=sad, angry=angry),
                comments=comments, shares=shares)


@pytest.fixture
def toy_posts():
    return [
        make_post(id="a", text="hola mundo", like=10),
        make_post(id="b", text="gran foto", like=2),
        make_post(id="c", text="nuevo curso", like=4),
        make_post(id="d", text="buen dia", like=0, love=0),
    ]
