"""
Utilitários de formatação das saídas da linha de comando
"""
import json
from typing import Any, Dict, Optional, Sequence

import pandas as pd

from ..models.data_models import AuditReport, KnnDistanceTable, SweepResult, WorstCaseSummary
from ..services.calibration_service import entropy_proxies

SWEEP_COLUMNS = [
    'word', 'epsilon', 'runs', 'unchanged_count', 'distinct_outputs', 'eta_support', 'h0', 'h_inf',
]
# Só no JSON e no texto: h_inf calculado com N_w limitado a 1
CLAMP_COLUMN = 'h_inf_clamped'

ETA_NOTE = (
    "eta_support é o menor conjunto de saídas com massa empírica >= 1 - eta; "
    "distinct_outputs (S_w) não depende de eta, cujo valor de referência não é fixado na literatura"
)


def sweep_to_frame(sweep: SweepResult) -> pd.DataFrame:
    """Uma linha por (palavra, ε), com os proxies de entropia e a marca de h_inf limitado"""
    rows = []
    for stats in sweep.stats:
        proxies = entropy_proxies(stats)
        rows.append({
            'word': stats.word,
            'epsilon': stats.epsilon,
            'runs': stats.runs,
            'unchanged_count': stats.unchanged_count,
            'distinct_outputs': stats.distinct_outputs,
            'eta_support': stats.eta_support,
            'h0': proxies.h0,
            'h_inf': proxies.h_inf,
            CLAMP_COLUMN: proxies.clamped,
        })
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS + [CLAMP_COLUMN])
    # Inteiro anulável: célula vazia quando eta não foi pedido
    frame['eta_support'] = frame['eta_support'].astype('Int64')
    return frame


def format_sweep_csv(sweep: SweepResult) -> str:
    """CSV com as colunas word,epsilon,runs,unchanged_count,distinct_outputs,eta_support,h0,h_inf"""
    return sweep_to_frame(sweep)[SWEEP_COLUMNS].to_csv(index=False, lineterminator="\n")


def format_sweep_json(sweep: SweepResult, summaries: Sequence[WorstCaseSummary]) -> str:
    """JSON com metadados, linhas da varredura, histogramas e resumo de pior caso"""
    frame = sweep_to_frame(sweep)
    rows = json.loads(frame.to_json(orient="records"))
    for row, stats in zip(rows, sweep.stats):
        row['top_outputs'] = [[word, count] for word, count in stats.top_outputs]

    document = {
        'metadata': {
            'runs': sweep.runs,
            'sample_size': sweep.sample_size,
            'seed': sweep.seed,
            'eta': sweep.eta,
            'epsilons': sweep.epsilons,
            'notes': [ETA_NOTE],
        },
        'rows': rows,
        'histograms': sweep.to_dict()['histograms'],
        'worst_case': [s.to_dict() for s in summaries],
    }
    return json.dumps(document, ensure_ascii=False, indent=2)


def format_worst_case_summary(summaries: Sequence[WorstCaseSummary], selected: Optional[float] = None) -> str:
    """Resumo legível de pior caso, um ε por linha"""
    if not summaries:
        return "Nenhuma estatística calculada."

    lines = ["Resumo de pior caso por ε:"]
    for s in summaries:
        lines.append(
            f"  ε={s.epsilon:g}: min S_w={s.min_distinct}, max N_w={s.max_unchanged}/{s.runs} "
            f"({s.max_unchanged_frequency:.1%}), média S_w={s.mean_distinct:.1f}, "
            f"média N_w={s.mean_unchanged_frequency:.1%} ({s.sample_size} palavras)"
        )
    if selected is not None:
        lines.append(f"Maior ε que atende aos limites: {selected:g}")
    return "\n".join(lines)


def format_knn_csv(table: KnnDistanceTable) -> str:
    """Linhas = k, colunas = percentis"""
    frame = pd.DataFrame(
        table.cells,
        index=pd.Index(table.ks, name='k'),
        columns=[f"p{p:g}" for p in table.percentiles],
    )
    return frame.to_csv(lineterminator="\n")


def format_knn_json(table: KnnDistanceTable) -> str:
    return json.dumps(table.to_dict(), ensure_ascii=False, indent=2) + "\n"


def format_knn_text(table: KnnDistanceTable) -> str:
    header = "k".rjust(6) + "".join(f"p{p:g}".rjust(12) for p in table.percentiles)
    lines = [f"Distância ao k-ésimo vizinho ({table.sample_size} palavras)", header]
    for k, row in zip(table.ks, table.cells):
        lines.append(str(k).rjust(6) + "".join(f"{v:12.4f}" for v in row))
    return "\n".join(lines)


def format_audit_json(report: AuditReport) -> str:
    return json.dumps(report.to_dict(), ensure_ascii=False, indent=2)


def format_audit_summary(report: AuditReport) -> str:
    """Resumo legível da auditoria"""
    verdict = "APROVADO" if report.passed else "REPROVADO"
    lines = [f"Auditoria ε={report.epsilon:g}: {verdict}"]
    if report.mutation:
        lines.append(f"  Mutação ativa: {report.mutation}")

    failed = [p for p in report.pairs if not p.passed]
    lines.append(f"  Pares: {len(report.pairs)} auditados, {len(failed)} com violação")
    for pair in failed:
        worst = pair.worst_output
        lines.append(
            f"    ({pair.word}, {pair.other_word}) saída '{worst.output_word}': "
            f"log-razão {worst.log_ratio:.4f} > ε·d {pair.bound:.4f} (SE {worst.standard_error:.4f})"
        )
    for comp in report.compositions:
        status = "ok" if comp.passed else "violação"
        lines.append(
            f"  Composição {' '.join(comp.words)}: TV={comp.tv_distance:.5f} "
            f"(limite {comp.threshold}) {status}"
        )
    return "\n".join(lines)


def format_cache_summary(info: Dict[str, Any]) -> str:
    return "\n".join(f"{key}: {value}" for key, value in info.items())


def format_help_message() -> str:
    """Formata mensagem de ajuda"""
    return """Comandos disponíveis:
  privatize   Aplica o mecanismo a cada linha do corpus (stdin ou --input)
  calibrate   Varredura de ε: N_w, S_w e proxies de entropia por palavra
  knn-stats   Percentis da distância ao k-ésimo vizinho
  audit       Auditoria empírica da garantia dχ em vocabulários pequenos
  cache       Converte embeddings em texto para o cache binário

Códigos de saída: 0 ok, 1 auditoria reprovada, 2 erro de E/S, 3 erro nos dados, 4 flags inválidas, 5 erro interno"""
