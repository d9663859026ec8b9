"""
Database model for a saved animation.
"""
from sqlalchemy import Column, Integer, String, Text

from .base import Base


class AnimationDB(Base):
    """An authored animation: its keyframe charts and its staged plan, as JSON text."""
    __tablename__ = 'animations'

    name = Column(String, primary_key=True)
    keyframes = Column(Text, nullable=False)
    plan = Column(Text, nullable=False)
    keyframe_count = Column(Integer, nullable=False)
    stage_count = Column(Integer, nullable=False)

    def __repr__(self):
        return f"<Animation {self.name} ({self.keyframe_count} keyframes, {self.stage_count} stages)>"
