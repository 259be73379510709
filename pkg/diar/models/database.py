from sqlalchemy import create_engine, Column, Integer, String, DateTime, Float, JSON, ForeignKey
from sqlalchemy.orm import declarative_base, sessionmaker
from datetime import datetime

Base = declarative_base()


class StateRun(Base):
    """Один снимок состояния сессии диаризации"""
    __tablename__ = "state_runs"

    id = Column(Integer, primary_key=True, index=True)
    uri = Column(String, nullable=False)
    phase = Column(String, nullable=False)
    current_k = Column(Integer, nullable=False)
    n_seen = Column(Integer, nullable=False)
    n_init = Column(Integer, nullable=False)
    n_ckpt = Column(Integer, nullable=False)
    centroid_threshold = Column(Float, nullable=False)
    emitted_count = Column(Integer, nullable=False)
    checkpoint_merges = Column(Integer, nullable=False, default=0)
    created_at = Column(DateTime, default=datetime.utcnow)


class CheckpointRow(Base):
    """Запись буфера чекпоинтов: позиция, вес и среднее"""
    __tablename__ = "checkpoint_entries"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("state_runs.id"), nullable=False, index=True)
    position = Column(Integer, nullable=False)
    weight = Column(Integer, nullable=False)
    mean = Column(JSON, nullable=False)  # список float


class CentroidRow(Base):
    """Живой центроид с меткой и счётчиком использования"""
    __tablename__ = "centroids"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("state_runs.id"), nullable=False, index=True)
    label = Column(Integer, nullable=False)
    usage = Column(Integer, nullable=False)
    weight = Column(Integer, nullable=False)
    mean = Column(JSON, nullable=False)


class AliasRow(Base):
    """Выбывшая метка и метка, в которую она слита"""
    __tablename__ = "label_aliases"

    id = Column(Integer, primary_key=True, index=True)
    run_id = Column(Integer, ForeignKey("state_runs.id"), nullable=False, index=True)
    retired_label = Column(Integer, nullable=False)
    survivor_label = Column(Integer, nullable=False)


def init_db(database_url: str) -> sessionmaker:
    """Создаёт таблицы и возвращает фабрику сессий"""
    engine = create_engine(database_url)
    Base.metadata.create_all(bind=engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)
