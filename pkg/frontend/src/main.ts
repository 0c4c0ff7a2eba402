// DOM shell around ReviewSession: renders state, wires buttons and keys.
// Keyboard: a = accept, e = focus editor, r = reject, s = skip,
// ctrl/cmd+Enter = submit edit.

import { ReviewApi, Stage } from './api.js';
import { diffWords } from './diff.js';
import { ReviewSession, encodeQaBlock, parseQaBlock } from './review.js';

const api = new ReviewApi('');
const stageParam = new URLSearchParams(window.location.search).get('stage');
const session = new ReviewSession(api, (stageParam as Stage) ?? undefined);

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function renderDiff(container: HTMLElement, before: string, after: string): void {
  container.textContent = '';
  for (const span of diffWords(before, after)) {
    const el = document.createElement('span');
    el.className = `diff-${span.kind}`;
    el.textContent = span.text + ' ';
    container.appendChild(el);
  }
}

function renderProgress(): void {
  const progress = session.progress;
  const bar = $('progress-fill');
  const label = $('progress-label');
  if (!progress || progress.total === 0) {
    bar.style.width = '0%';
    label.textContent = 'no records';
    return;
  }
  const done = progress.total - progress.pending;
  bar.style.width = `${(100 * done) / progress.total}%`;
  label.textContent =
    `${done}/${progress.total} decided - ` +
    `${progress.accepted} accepted, ${progress.edited} edited, ${progress.rejected} rejected`;
}

function isSynth(): boolean {
  return session.current?.stage === 'synth_question';
}

function syncBufferFromInputs(): void {
  if (!session.current) return;
  if (isSynth()) {
    const question = $<HTMLTextAreaElement>('synth-question').value;
    const answer = $<HTMLTextAreaElement>('synth-answer').value;
    session.buffer = answer.trim() ? encodeQaBlock(question, answer) : question;
  } else {
    session.buffer = $<HTMLTextAreaElement>('editor').value;
  }
  session.note = $<HTMLInputElement>('note').value;
}

function render(): void {
  $('banner-error').hidden = !session.networkError;
  $('banner-error-text').textContent = session.networkError ?? '';
  $('banner-conflict').hidden = !session.conflictNotice;
  $('banner-conflict-text').textContent = session.conflictNotice ?? '';
  $('banner-validation').hidden = !session.validationError;
  $('banner-validation-text').textContent = session.validationError ?? '';
  renderProgress();

  const card = $('record-card');
  const empty = $('empty-state');
  if (session.phase === 'empty') {
    card.hidden = true;
    empty.hidden = false;
    return;
  }
  if (!session.current) {
    card.hidden = true;
    empty.hidden = true;
    return;
  }
  card.hidden = false;
  empty.hidden = true;

  const record = session.current;
  $('stage-badge').textContent = record.stage;
  $('record-id').textContent = record.id;
  $('queue-label').textContent = `${session.remaining()} pending`;
  $('original-text').textContent = record.original;
  renderDiff($('diff-view'), record.original, record.proposed);

  const synthRow = $('synth-fields');
  const editorRow = $('editor-row');
  if (isSynth()) {
    synthRow.hidden = false;
    editorRow.hidden = true;
    const parts = parseQaBlock(session.buffer) ?? { question: session.buffer, answer: '' };
    $<HTMLTextAreaElement>('synth-question').value = parts.question;
    $<HTMLTextAreaElement>('synth-answer').value = parts.answer;
  } else {
    synthRow.hidden = true;
    editorRow.hidden = false;
    $<HTMLTextAreaElement>('editor').value = session.buffer;
  }
  $<HTMLInputElement>('note').value = session.note;
}

async function act(action: 'accept' | 'edit' | 'reject'): Promise<void> {
  syncBufferFromInputs();
  await session.decide(action);
  render();
}

function wire(): void {
  $('btn-accept').addEventListener('click', () => void act('accept'));
  $('btn-edit').addEventListener('click', () => void act('edit'));
  $('btn-reject').addEventListener('click', () => void act('reject'));
  $('btn-skip').addEventListener('click', () => {
    session.skip();
    render();
  });
  $('btn-retry').addEventListener('click', () => void session.reload().then(render));

  document.addEventListener('keydown', (event) => {
    const target = event.target as HTMLElement;
    const typing = target instanceof HTMLTextAreaElement || target instanceof HTMLInputElement;
    if ((event.ctrlKey || event.metaKey) && event.key === 'Enter') {
      void act('edit');
      return;
    }
    if (typing) return;
    if (event.key === 'a') void act('accept');
    else if (event.key === 'r') void act('reject');
    else if (event.key === 's') {
      session.skip();
      render();
    } else if (event.key === 'e') {
      (isSynth() ? $<HTMLTextAreaElement>('synth-question') : $<HTMLTextAreaElement>('editor')).focus();
    }
  });
}

wire();
void session.start().then(render);
