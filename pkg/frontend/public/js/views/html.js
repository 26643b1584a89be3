/** Minimal HTML escaping for string-template views. */
const REPLACEMENTS = {
    "&": "&amp;",
    "<": "&lt;",
    ">": "&gt;",
    '"': "&quot;",
    "'": "&#39;",
};
export function escapeHtml(text) {
    return text.replace(/[&<>"']/g, (ch) => REPLACEMENTS[ch]);
}
