"""Small builders shared across test modules."""

from storyrank import dataset as ds


def make_items(sps, split="train", prefix="I"):
    """Labeled items with the given story points, texts echo the index."""
    return [
        ds.BacklogItem(id=f"{prefix}{i}", title=f"task {i}", description=f"detail {i}",
                       story_point=float(sp), split=split)
        for i, sp in enumerate(sps)
    ]
