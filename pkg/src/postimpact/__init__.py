"""postimpact: predicts whether a social-media post will land high or low
across six engagement metrics, before it is published."""

__version__ = "0.1.0"
