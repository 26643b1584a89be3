/** JSON document shapes served by the recognition service API (v1). */
export {};
